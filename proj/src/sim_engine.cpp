#include "smarton/sim_engine.hpp"

#include <algorithm>

namespace smarton {

EnergyStore StoreConfig::build() const {
  if (kind == StoreKind::abstract) return EnergyStore(AbstractStore(capacity, charging_ratio, wake_cost, initial));
  ArrayParams params = capacitances.empty() ? smarton::array_preset(array_preset) : ArrayParams{capacitances, v_activate, v_max};
  params.v_activate = v_activate;
  params.v_max = v_max;
  return EnergyStore(CapacitorArray(std::move(params), charging_ratio, wake_cost, initial_voltage));
}

HarvestSource SourceConfig::build() const {
  if (kind == "constant") return HarvestSource::constant(intensity);
  if (kind == "diurnal") return HarvestSource::diurnal(intensity, day_ticks, daylight_ticks, offset);
  if (kind == "trace") return HarvestSource::load_trace(path);
  throw ValidationError("energy.source", "unknown source '" + kind + "' (valid: constant, diurnal, trace)");
}

void validate(const SimConfig& c) {
  auto check = [](bool ok, const char* field, const std::string& message) {
    if (!ok) throw ValidationError(field, message);
  };
  try {
    build_pattern(c.pattern);
    for (const auto& entry : c.schedule) {
      PatternParams p = c.pattern;
      p.peaks = entry.peaks;
      build_pattern(p);
    }
  } catch (const InvalidSpec& e) {
    throw ValidationError("pattern", e.what());
  }
  for (std::size_t i = 0; i < c.schedule.size(); ++i) {
    check(c.schedule[i].start_period > 0, "pattern.schedule", "entries must start after period 0");
    if (i > 0)
      check(c.schedule[i].start_period > c.schedule[i - 1].start_period, "pattern.schedule",
            "entries must be in increasing period order");
  }
  try {
    validate(c.learner);
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    throw ValidationError(what.substr(0, what.find(':')), what.substr(what.find(':') + 2));
  }
  check(c.pattern.period_ticks % c.learner.state_duration == 0, "learner.state_duration",
        "must divide the period");
  check(c.store.capacity > 0.0, "energy.capacity", "must be > 0");
  check(c.store.charging_ratio > 0.0, "energy.charging_ratio", "must be > 0");
  check(c.store.wake_cost > 0.0, "energy.wake_cost", "must be > 0");
  check(c.store.initial >= 0.0 && c.store.initial <= c.store.capacity, "energy.initial", "outside [0, capacity]");
  auto level_ok = [&](const std::optional<int>& e) { return !e || (*e >= 1 && *e <= c.learner.levels); };
  check(level_ok(c.store.entry_level), "energy.entry_level", "must lie in 1..levels");
  for (const auto& entry : c.schedule) check(level_ok(entry.entry_level), "pattern.schedule", "entry level outside 1..levels");
  check(c.source.kind == "constant" || c.source.kind == "diurnal" || c.source.kind == "trace", "energy.source",
        "unknown source '" + c.source.kind + "' (valid: constant, diurnal, trace)");
  check(c.source.intensity >= 0.0, "energy.intensity", "must be >= 0");
  check(c.n_periods >= 0, "n_periods", "must be >= 0");
  check(c.stop_after_stable >= 0, "stop_after_stable", "must be >= 0");
  check(c.eval_periods >= 0, "eval_periods", "must be >= 0");
  try {
    const EnergyStore store = c.store.build();
    if (c.policy == PolicyKind::ctid || c.policy == PolicyKind::ctidpro) c.ctid.validate(store.capacity());
  } catch (const ValidationError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    throw ValidationError(what.rfind("policy.", 0) == 0 ? what.substr(0, what.find(':')) : "energy", what);
  }
}

int PeriodLog::learning_episodes() const {
  return static_cast<int>(
      std::count_if(episodes.begin(), episodes.end(), [](const EpisodeRecord& e) { return e.learning; }));
}

Metrics compute_metrics(std::span<const PeriodLog> logs) {
  Metrics m;
  double spent = 0.0;
  double spent_on_events = 0.0;
  for (const auto& log : logs) {
    ++m.periods;
    m.total_catches += log.catches;
    m.awake_ticks += log.awake_ticks;
    m.event_ticks += log.event_ticks;
    m.skipped_wakeups += log.skipped_wakeups;
    m.no_event_wakeups += log.no_event_wakeups;
    m.periods_in_phase[static_cast<std::size_t>(std::clamp(log.phase, 0, 3))] += 1;
    m.phase2_episodes += log.learning_episodes();
    spent += log.spent;
    spent_on_events += log.spent_on_events;
  }
  m.energy_efficiency = spent > 0.0 ? spent_on_events / spent : 0.0;
  return m;
}

std::unique_ptr<Policy> make_policy(const SimConfig& config, const EnergyStore& store) {
  switch (config.policy) {
    case PolicyKind::gt:
      return std::make_unique<GtPolicy>();
    case PolicyKind::ctid:
      return std::make_unique<CtidPolicy>(config.ctid);
    case PolicyKind::smarton:
    case PolicyKind::ctidpro: {
      std::unique_ptr<SmartOnPolicy> p;
      if (config.policy == PolicyKind::smarton)
        p = std::make_unique<SmartOnPolicy>(config.learner, config.pattern.period_ticks, store.capacity(),
                                            store.wake_cost(), config.seed);
      else
        p = std::make_unique<CtidProPolicy>(config.learner, config.pattern.period_ticks, store.capacity(),
                                            store.wake_cost(), config.seed, config.ctid);
      for (const auto& table : config.warm_start) p->warm_start(table);
      return p;
    }
  }
  throw std::logic_error("unhandled policy kind");
}

Simulation::Simulation(const SimConfig& config)
    : config_((validate(config), config)), store_(config.store.build()), source_(config.source.build()) {
  std::vector<PatternSegment> segments;
  auto add = [&](std::int64_t start, const PatternParams& params, std::optional<int> level) {
    Segment s{start, build_pattern(params), level, {}};
    for (const auto& peak : s.pattern.peaks()) s.peak_starts.push_back(peak.start_slot * params.state_duration);
    segments.push_back({start, s.pattern});
    segments_.push_back(std::move(s));
  };
  add(0, config_.pattern, config_.store.entry_level);
  for (const auto& entry : config_.schedule) {
    PatternParams p = config_.pattern;
    p.peaks = entry.peaks;
    add(entry.start_period, p, entry.entry_level);
  }
  trace_ = sample_trace(segments, config_.seed, config_.n_periods);
  policy_ = make_policy(config_, store_);
  learner_ = dynamic_cast<SmartOnPolicy*>(policy_.get());
  slot_ticks_ = learner_ ? config_.learner.state_duration : config_.pattern.state_duration;
}

const Simulation::Segment& Simulation::segment_at(std::int64_t k) const {
  std::size_t i = 0;
  while (i + 1 < segments_.size() && segments_[i + 1].start <= k) ++i;
  return segments_[i];
}

const EventPattern& Simulation::pattern_at(std::int64_t k) const { return segment_at(k).pattern; }

std::optional<int> Simulation::entry_level_at(std::int64_t k) const {
  return has_override_ ? override_level_ : segment_at(k).entry_level;
}

PeriodLog Simulation::run_period(std::int64_t k) {
  if (k < 0 || k >= config_.n_periods) throw std::out_of_range("period " + std::to_string(k) + " outside the run");
  const int period = config_.pattern.period_ticks;
  const Segment& segment = segment_at(k);
  const std::optional<int> level = entry_level_at(k);
  const double ceiling = level ? level_ceiling(*level, store_.capacity(), config_.learner.levels) : 0.0;
  const bool per_tick = config_.record_level == RecordLevel::per_tick;

  PeriodLog log;
  log.period = k;
  log.stored_start = store_.stored();
  policy_->begin_period(k, store_);
  log.phase = policy_->phase();
  if (per_tick) log.ticks.reserve(static_cast<std::size_t>(period));

  const double wake_cost = store_.wake_cost();
  std::size_t next_peak = 0;
  for (int i = 0; i < period; ++i) {
    if (level && next_peak < segment.peak_starts.size() && segment.peak_starts[next_peak] == i) {
      log.wasted_entry_control += store_.clamp_to(ceiling);
      ++next_peak;
    }
    const std::int64_t t = k * period + i;
    const TickView view = tick_view(t, period, slot_ticks_);
    const bool event = trace_[t];
    const TickOutcome out = policy_step(*policy_, store_, source_, view, event);

    log.event_ticks += event ? 1 : 0;
    log.skipped_wakeups += out.skipped ? 1 : 0;
    if (out.awake) {
      ++log.awake_ticks;
      log.spent += wake_cost;
      if (event) {
        ++log.catches;
        log.spent_on_events += wake_cost;
      } else {
        ++log.no_event_wakeups;
      }
    }
    log.drawn += out.drawn;
    log.offered += out.harvest.offered;
    log.harvested += out.harvest.net_inflow();
    log.wasted_saturation += out.harvest.wasted_saturation;
    log.conversion_loss += out.harvest.conversion_loss;
    log.redistribution_loss += out.harvest.redistribution_loss;
    log.activations += out.harvest.activations;
    if (per_tick) {
      log.ticks.push_back(TickRecord{out.awake, event, out.skipped, out.drawn, out.harvest.net_inflow(), store_.stored(),
                                     log.phase, view.slot, policy_->current_step()});
    }
  }
  policy_->end_period(k, store_);
  log.phase_end = policy_->phase();
  log.episodes = policy_->take_episodes();
  log.stored_end = store_.stored();
  return log;
}

PeriodLog run_period(Simulation& sim, std::int64_t period_index) { return sim.run_period(period_index); }

Metrics ExperimentResult::tail_metrics(int n) const {
  std::span<const PeriodLog> all(periods);
  if (n <= 0 || static_cast<std::size_t>(n) >= all.size()) return compute_metrics(all);
  return compute_metrics(all.subspan(all.size() - static_cast<std::size_t>(n)));
}

ExperimentResult run_experiment(const SimConfig& config) {
  ExperimentResult result;
  if (config.n_periods == 0) return result;
  Simulation sim(config);
  const std::int64_t last_change = config.schedule.empty() ? 0 : config.schedule.back().start_period;
  int stable = 0;
  for (std::int64_t k = 0; k < config.n_periods; ++k) {
    result.periods.push_back(sim.run_period(k));
    const auto& log = result.periods.back();
    stable = (log.phase == 3 && log.phase_end == 3) ? stable + 1 : 0;
    if (sim.learner() && config.stop_after_stable > 0 && k >= last_change && stable >= config.stop_after_stable) {
      result.stopped_early = k + 1 < config.n_periods;
      break;
    }
  }
  if (const auto* learner = sim.learner()) {
    result.tables = learner->context().tables;
    result.detected_peaks = learner->context().peaks;
    result.phase1_sessions = learner->context().phase1_sessions;
  }
  return result;
}

ConvergenceStats convergence_stats(const ExperimentResult& result) {
  ConvergenceStats stats;
  for (const auto& [shape, table] : result.tables) {
    for (int level = 1; level <= table.levels(); ++level) {
      const auto& p = table.partition(level);
      stats.entries.push_back(
          {shape.str(), level, p.episodes, p.converged, p.episodes_to_converge, p.learn_order});
    }
  }
  int run = 0;
  for (const auto& log : result.periods) {
    stats.phase2_episodes += log.learning_episodes();
    if (log.phase == 1) {
      ++run;
    } else if (run > 0) {
      stats.phase1_passes.push_back(run);
      run = 0;
    }
  }
  if (run > 0) stats.phase1_passes.push_back(run);
  return stats;
}

}  // namespace smarton

#include "smarton/policies.hpp"

#include <algorithm>
#include <cmath>

namespace smarton {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::smarton: return "smarton";
    case PolicyKind::ctid: return "ctid";
    case PolicyKind::ctidpro: return "ctidpro";
    case PolicyKind::gt: return "gt";
  }
  return "?";
}

PolicyKind parse_policy(std::string_view name) {
  if (name == "smarton") return PolicyKind::smarton;
  if (name == "ctid") return PolicyKind::ctid;
  if (name == "ctidpro") return PolicyKind::ctidpro;
  if (name == "gt") return PolicyKind::gt;
  throw std::invalid_argument("unknown policy '" + std::string(name) + "' (valid: smarton, ctid, ctidpro, gt)");
}

TickView tick_view(std::int64_t tick, int period_ticks, int slot_ticks) {
  TickView v;
  v.tick = tick;
  v.period = tick / period_ticks;
  v.tick_in_period = static_cast<int>(tick % period_ticks);
  v.slot = v.tick_in_period / slot_ticks;
  v.offset = v.tick_in_period % slot_ticks;
  v.slot_ticks = slot_ticks;
  return v;
}

WakeDecision gt_schedule(std::int64_t begin, std::int64_t end) {
  WakeDecision d;
  for (auto t = begin; t < end; ++t) d.awake_instants.push_back(t);
  return d;
}

void CtidConfig::validate(double capacity) const {
  if (!(e_off >= 0.0)) throw std::invalid_argument("policy.ctid_off: must be >= 0");
  if (!(e_off < e_on)) throw std::invalid_argument("policy.ctid_on: must exceed ctid_off");
  if (e_on > capacity + kEnergyEpsilon) throw std::invalid_argument("policy.ctid_on: exceeds the store capacity");
  if (!(discharge_frequency > 0.0 && discharge_frequency <= 1.0))
    throw std::invalid_argument("policy.ctid_frequency: must lie in (0, 1]");
}

bool ctid_decide(CtidState& state, double stored, double wake_cost, const CtidConfig& config, std::int64_t tick) {
  if (!state.discharging && stored + kEnergyEpsilon >= config.e_on) {
    state.discharging = true;
    state.discharge_start = tick;
  }
  if (!state.discharging) return false;
  if (stored + kEnergyEpsilon < config.e_off + wake_cost) {
    state.discharging = false;
    return false;
  }
  // Wake-ups fall on ceil(j / f) ticks after the discharge began.
  const auto k = static_cast<double>(tick - state.discharge_start);
  const double j = std::floor(k * config.discharge_frequency + 1e-9);
  return std::ceil(j / config.discharge_frequency - 1e-9) == k;
}

WakeDecision ctid_step(CtidState& state, EnergyStore& store, const CtidConfig& config, std::int64_t tick) {
  WakeDecision d;
  if (ctid_decide(state, store.stored(), store.wake_cost(), config, tick) && store.try_draw(store.wake_cost())) {
    d.awake_instants.push_back(tick);
    d.energy_drawn = store.wake_cost();
  }
  return d;
}

SmartOnPolicy::SmartOnPolicy(LearnerConfig config, int period_ticks, double capacity, double wake_cost,
                             std::uint64_t seed)
    : config_(std::move(config)), period_ticks_(period_ticks), capacity_(capacity), wake_cost_(wake_cost) {
  if (config_.state_duration <= 0 || period_ticks % config_.state_duration != 0)
    throw std::invalid_argument("learner.state_duration: must divide the period (" + std::to_string(period_ticks) + ")");
  ctx_ = make_context(period_ticks / config_.state_duration);
  const auto streams = rng_streams(seed);
  explore_ = streams.explore;
  probe_rng_ = streams.probe;
  costs_ = action_costs(config_, wake_cost_);
  for (double f : config_.actions.frequencies) {
    std::vector<std::uint8_t> awake(static_cast<std::size_t>(config_.state_duration), 0);
    for (int o : wake_offsets(f, config_.state_duration)) awake[static_cast<std::size_t>(o)] = 1;
    schedule_.push_back(std::move(awake));
  }
}

void SmartOnPolicy::transition(const Observation& observation) { phase_transition(ctx_, observation, config_); }

void SmartOnPolicy::assume_profile(std::vector<DetectedPeak> peaks) {
  transition(ProfileConvergedObs{std::move(peaks)});
  after_profile_converged();
}

void SmartOnPolicy::warm_start(QTable table) {
  if (table.levels() != config_.levels || table.actions() != config_.actions.size())
    throw std::invalid_argument("warm-start table " + table.shape().str() + " does not match K or N");
  for (int level = 1; level <= table.levels(); ++level) {
    auto& p = table.partition(level);
    if (!p.converged) {
      p.converged = true;
      p.learn_order = table.next_learn_order();
    }
  }
  const auto shape = table.shape();
  ctx_.tables.insert_or_assign(shape, std::move(table));
}

void SmartOnPolicy::begin_period(std::int64_t period, const EnergyStore&) {
  period_ = period;
  probe_catches_ = 0;
  probes_.clear();
  if (ctx_.phase == Phase::exploiting && probes_enabled()) probes_ = probe_plan(ctx_, config_, probe_rng_);
}

SmartOnPolicy::SlotPlan SmartOnPolicy::plan_peak_slot(int peak_index, int step, const EnergyStore& store) {
  const auto& peak = ctx_.peaks[static_cast<std::size_t>(peak_index)];
  QTable& table = ctx_.table_for(peak.shape, config_);
  const int level = quantize_level(store.stored(), capacity_, config_.levels);
  if (step == 1) {
    episode_ = Episode{};
    episode_.active = true;
    episode_.peak = peak_index;
    episode_.shape = peak.shape;
    episode_.entry_level = level;
    episode_.record.period = period_;
    episode_.record.shape = peak.shape.str();
    episode_.record.peak_start_slot = peak.start_slot;
    episode_.record.entry_level = level;
    episode_.record.learning = ctx_.phase == Phase::learning;
    ctx_.entry_levels[peak.shape] = level;
  } else if (!episode_.active || episode_.peak != peak_index) {
    return SlotPlan::sleep;
  }
  episode_.state = table.state(level, step);
  if (ctx_.phase == Phase::learning)
    table.note_visit(episode_.entry_level, episode_.state, affordable_actions(costs_, store.stored()));
  action_ = choose_action(table, episode_.state, ctx_.phase, store.stored(), costs_, explore_);
  episode_.record.actions.push_back(action_);
  return SlotPlan::act;
}

void SmartOnPolicy::after_profile_converged() {}

bool SmartOnPolicy::wants_wake(const TickView& view, const EnergyStore& store) {
  if (view.slot_start()) {
    plan_ = SlotPlan::sleep;
    action_ = 0;
    current_step_ = 0;
    slot_catches_ = 0;
    slot_awake_ = 0;
    if (ctx_.phase == Phase::profiling) {
      if (should_profile(ctx_, view.slot, store.stored(), config_, wake_cost_)) {
        plan_ = SlotPlan::profile;
        action_ = config_.actions.highest();
      }
    } else if (const int pk = ctx_.peak_of_slot[static_cast<std::size_t>(view.slot)]; pk >= 0) {
      current_step_ = view.slot - ctx_.peaks[static_cast<std::size_t>(pk)].start_slot + 1;
      plan_ = plan_peak_slot(pk, current_step_, store);
    } else if (ctx_.phase == Phase::exploiting && std::binary_search(probes_.begin(), probes_.end(), view.slot)) {
      const int a = config_.actions.lowest_nonzero();
      if (costs_[static_cast<std::size_t>(a)] <= store.stored() + kEnergyEpsilon) {
        plan_ = SlotPlan::probe;
        action_ = a;
      }
    }
  }
  const auto offset = static_cast<std::size_t>(view.offset);
  switch (plan_) {
    case SlotPlan::sleep:
      return false;
    case SlotPlan::greedy:
      return greedy_wake(view, store);
    default:
      return schedule_[static_cast<std::size_t>(action_)][offset] != 0;
  }
}

void SmartOnPolicy::observe(const TickView& view, bool awake, bool event, const EnergyStore& store) {
  if (awake) {
    ++slot_awake_;
    slot_catches_ += event ? 1 : 0;
  }
  if (view.slot_end()) finish_slot(view, store);
}

void SmartOnPolicy::finish_slot(const TickView& view, const EnergyStore& store) {
  switch (plan_) {
    case SlotPlan::profile:
      ctx_.profile.record(view.slot, slot_catches_);
      break;
    case SlotPlan::probe:
      probe_catches_ += slot_catches_;
      break;
    case SlotPlan::act: {
      QTable& table = ctx_.table_for(episode_.shape, config_);
      const double reward = slot_catches_ * instant_reward(true, config_) +
                            (slot_awake_ - slot_catches_) * instant_reward(false, config_);
      const bool last = current_step_ == table.steps();
      if (ctx_.phase == Phase::learning) {
        std::optional<int> next;
        if (!last) next = table.state(quantize_level(store.stored(), capacity_, config_.levels), current_step_ + 1);
        const QUpdate u = q_update(table, episode_.state, action_, reward, next, config_,
                                   affordable_actions(costs_, store.stored()));
        if (std::abs(u.after) > config_.q_bound() * (1.0 + 1e-12))
          throw std::logic_error("Q-value " + std::to_string(u.after) + " exceeds its bound");
        episode_.all_quiet = episode_.all_quiet && u.quiet;
      }
      episode_.record.reward += reward;
      episode_.record.catches += slot_catches_;
      if (last) {
        if (ctx_.phase == Phase::learning) {
          record_episode(table, episode_.entry_level, episode_.all_quiet, config_);
          ++ctx_.phase2_episodes;
        }
        finished_.push_back(std::move(episode_.record));
        episode_ = Episode{};
      }
      break;
    }
    case SlotPlan::greedy:
    case SlotPlan::sleep:
      break;
  }
  plan_ = SlotPlan::sleep;
}

void SmartOnPolicy::end_period(std::int64_t, const EnergyStore&) {
  switch (ctx_.phase) {
    case Phase::profiling:
      if (close_profile_pass(ctx_, config_)) {
        auto peaks = detect_peaks(ctx_.profile.mean_recent(config_.profile_window), config_);
        transition(ProfileConvergedObs{std::move(peaks)});
        after_profile_converged();
      }
      break;
    case Phase::learning: {
      if (config_.hold_learning) break;
      const bool done = std::all_of(ctx_.peaks.begin(), ctx_.peaks.end(), [&](const DetectedPeak& p) {
        const auto level = ctx_.entry_levels.find(p.shape);
        const auto table = ctx_.tables.find(p.shape);
        return level != ctx_.entry_levels.end() && table != ctx_.tables.end() &&
               table->second.partition(level->second).converged;
      });
      if (done) transition(PartitionConvergedObs{});
      break;
    }
    case Phase::exploiting:
      if (probe_catches_ > 0) {
        transition(ProbeCaughtObs{probe_catches_});
      } else {
        transition(ProbeQuietObs{});
      }
      break;
  }
}

std::vector<EpisodeRecord> SmartOnPolicy::take_episodes() {
  std::vector<EpisodeRecord> out;
  out.swap(finished_);
  return out;
}

SmartOnPolicy::SlotPlan CtidProPolicy::plan_peak_slot(int, int, const EnergyStore&) { return SlotPlan::greedy; }

bool CtidProPolicy::greedy_wake(const TickView& view, const EnergyStore& store) {
  return ctid_decide(state_, store.stored(), store.wake_cost(), ctid_, view.tick);
}

void CtidProPolicy::after_profile_converged() {
  if (ctx_.phase == Phase::learning) transition(PartitionConvergedObs{});
}

TickOutcome policy_step(Policy& policy, EnergyStore& store, const HarvestSource& source, const TickView& view,
                        bool event) {
  TickOutcome out;
  if (policy.wants_wake(view, store)) {
    if (!policy.debits_energy()) {
      out.awake = true;
    } else if (store.try_draw(store.wake_cost())) {
      out.awake = true;
      out.drawn = store.wake_cost();
    } else {
      out.skipped = true;
    }
  }
  if (!out.awake || !policy.debits_energy()) out.harvest = harvest_tick(store, source, view.tick);
  policy.observe(view, out.awake, event, store);
  return out;
}

}  // namespace smarton

#include "smarton/studies.hpp"

#include <algorithm>
#include <numeric>

namespace smarton {

std::vector<DetectedPeak> true_peaks(const PatternParams& pattern) {
  std::vector<DetectedPeak> out;
  for (const auto& p : pattern.peaks) out.push_back({p.start_slot, ShapeKey{p.steps}});
  return out;
}

SimConfig learning_study_config(int levels, std::uint64_t seed) {
  SimConfig c;
  c.pattern.peaks = {make_peak("type1", 10)};
  c.learner.levels = levels;
  c.learner.hold_learning = true;
  c.store.initial = c.store.capacity;
  c.seed = seed;
  c.stop_after_stable = 0;
  return c;
}

namespace {

Simulation start_learning(SimConfig& config, std::int64_t periods) {
  config.n_periods = periods;
  config.policy = PolicyKind::smarton;
  config.learner.hold_learning = true;
  Simulation sim(config);
  sim.learner()->assume_profile(true_peaks(config.pattern));
  return sim;
}

const QTable& study_table(const Simulation& sim) {
  return sim.learner()->context().tables.at(ShapeKey{sim.config().pattern.peaks.front().steps});
}

}  // namespace

OrderStudy run_order_study(const SimConfig& base, int max_episodes) {
  SimConfig config = base;
  const int levels = config.learner.levels;
  Simulation sim = start_learning(config, static_cast<std::int64_t>(levels) * max_episodes);

  OrderStudy study;
  study.order.resize(static_cast<std::size_t>(levels));
  std::iota(study.order.begin(), study.order.end(), 1);
  auto shuffle = rng_streams(config.seed).shuffle;
  shuffle_in_place(std::span<int>(study.order), shuffle);

  std::int64_t k = 0;
  for (int level : study.order) {
    sim.set_entry_level(level);
    int used = 0;
    while (used < max_episodes) {
      sim.run_period(k++);
      ++used;
      if (study_table(sim).partition(level).converged) break;
    }
    const auto& p = study_table(sim).partition(level);
    study.complete = study.complete && p.converged;
    study.episodes.push_back(p.converged ? p.episodes_to_converge : used);
  }
  return study;
}

GatingStudy run_gating_study(const SimConfig& base, int max_episodes) {
  SimConfig config = base;
  Simulation sim = start_learning(config, max_episodes);
  auto shuffle = rng_streams(config.seed).shuffle;
  GatingStudy study;
  for (int k = 0; k < max_episodes; ++k) {
    sim.set_entry_level(1 + static_cast<int>(shuffle.uniform_int(static_cast<std::uint64_t>(config.learner.levels))));
    sim.run_period(k);
    const QTable& table = study_table(sim);
    if (study.first_exploitable == 0 && table.converged_levels() > 0) study.first_exploitable = k + 1;
    if (table.fully_converged()) {
      study.full_table = k + 1;
      return study;
    }
  }
  study.complete = false;
  study.full_table = max_episodes;
  if (study.first_exploitable == 0) study.first_exploitable = max_episodes;
  return study;
}

std::optional<int> phase1_passes(SimConfig config) {
  config.policy = PolicyKind::smarton;
  Simulation sim(config);
  for (std::int64_t k = 0; k < config.n_periods; ++k) {
    sim.run_period(k);
    if (sim.learner()->phase() != static_cast<int>(Phase::profiling)) return static_cast<int>(k + 1);
  }
  return std::nullopt;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need two or more points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: x values are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

SimConfig adaptation_config(std::uint64_t seed, std::int64_t second, std::int64_t third, std::int64_t n_periods) {
  SimConfig c;
  c.pattern.peaks = {make_peak("type1", 10)};
  c.store.entry_level = 4;
  c.schedule = {{second, {make_peak("type3", 24)}, 3}, {third, {make_peak("type1", 10)}, 4}};
  c.n_periods = n_periods;
  c.seed = seed;
  c.stop_after_stable = 0;
  return c;
}

namespace {

double mean_misses(const ExperimentResult& result, std::int64_t begin, std::int64_t end) {
  double sum = 0.0;
  for (auto k = begin; k < end; ++k) sum += static_cast<double>(result.periods[static_cast<std::size_t>(k)].misses());
  return end > begin ? sum / static_cast<double>(end - begin) : 0.0;
}

}  // namespace

std::vector<SegmentReport> segment_reports(const SimConfig& config, const ExperimentResult& result) {
  std::vector<std::int64_t> starts{0};
  for (const auto& e : config.schedule) starts.push_back(e.start_period);
  const auto total = static_cast<std::int64_t>(result.periods.size());

  std::vector<SegmentReport> out;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    SegmentReport r;
    r.start = std::min(starts[s], total);
    r.end = s + 1 < starts.size() ? std::min(starts[s + 1], total) : total;
    for (auto k = r.start; k < r.end; ++k) {
      const PeriodLog& log = result.periods[static_cast<std::size_t>(k)];
      r.phase2_episodes += log.learning_episodes();
      const bool entered = log.phase == 3 && (k == 0 || result.periods[static_cast<std::size_t>(k - 1)].phase != 3);
      if (!entered || k == 0) continue;
      if (!r.periods_to_phase3) r.periods_to_phase3 = k - r.start;
      r.miss_drops.emplace_back(mean_misses(result, std::max<std::int64_t>(0, k - 10), k),
                                mean_misses(result, k, std::min(k + 3, total)));
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace smarton

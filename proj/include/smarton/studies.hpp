#pragma once

// Convergence and adaptation studies layered on the simulation engine: the
// entry-level learning-order study, monolithic versus partitioned gating,
// Phase-1 passes against the charging ratio, and pattern-change timelines.

#include <cstdint>
#include <optional>
#include <vector>

#include "smarton/sim_engine.hpp"

namespace smarton {

/// The peaks of `pattern` as a perfect profile would report them.
std::vector<DetectedPeak> true_peaks(const PatternParams& pattern);

/// Learning on a known profile: type1 at slot 10, K entry levels, a full
/// store at start and learning held open after partitions converge.
SimConfig learning_study_config(int levels, std::uint64_t seed);

struct OrderStudy {
  std::vector<int> order;     // entry level trained at each position
  std::vector<int> episodes;  // episodes that level needed, by position
  bool complete = true;       // every level converged within the cap
};

/// Trains one entry level at a time, in an order drawn from the `shuffle`
/// stream, each until its partition converges or `max_episodes` pass.
OrderStudy run_order_study(const SimConfig& config, int max_episodes);

struct GatingStudy {
  int first_exploitable = 0;  // episode index at which the first partition converged
  int full_table = 0;         // episode index at which every partition had converged
  bool complete = true;
};

/// Entry levels drawn uniformly per episode until the whole table converges.
GatingStudy run_gating_study(const SimConfig& config, int max_episodes);

/// Periods spent in Phase 1 before the first profile converged, or nullopt
/// when it did not within config.n_periods.
std::optional<int> phase1_passes(SimConfig config);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares. Needs at least two distinct x values.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// type1@10 at E4, then type3@24 at E3 from `second`, then type1@10 at E4
/// again from `third`.
SimConfig adaptation_config(std::uint64_t seed, std::int64_t second = 1000, std::int64_t third = 2000,
                            std::int64_t n_periods = 2600);

struct SegmentReport {
  std::int64_t start = 0;
  std::int64_t end = 0;
  std::optional<std::int64_t> periods_to_phase3;  // from segment start
  int phase2_episodes = 0;
  // Per Phase-3 entry: mean misses over up to 10 periods before it, and mean
  // misses over the entry period and the two after it.
  std::vector<std::pair<double, double>> miss_drops;
};

std::vector<SegmentReport> segment_reports(const SimConfig& config, const ExperimentResult& result);

}  // namespace smarton

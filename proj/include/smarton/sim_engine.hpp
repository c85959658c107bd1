#pragma once

// Per-second simulation loop binding an energy store, an event trace and a
// policy; period logs, metrics and convergence statistics.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smarton/energy_model.hpp"
#include "smarton/event_world.hpp"
#include "smarton/learner.hpp"
#include "smarton/policies.hpp"

namespace smarton {

/// Invalid configuration value; field() names the offending key, e.g. "learner.alpha".
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class StoreKind { abstract, array };

struct StoreConfig {
  StoreKind kind = StoreKind::abstract;
  double capacity = 120.0;
  double charging_ratio = 9.0;
  double wake_cost = 1.0;
  double initial = 0.0;
  // Capacitor array only. Capacitances override the preset when non-empty.
  std::string array_preset = "image";
  std::vector<double> capacitances;
  double v_activate = 2.8;
  double v_max = 3.3;
  double initial_voltage = 0.0;
  // Stored energy is lowered to the top of this level at the first tick of
  // every peak of the event pattern.
  std::optional<int> entry_level;

  EnergyStore build() const;
  bool operator==(const StoreConfig&) const = default;
};

struct SourceConfig {
  std::string kind = "constant";  // constant | diurnal | trace
  double intensity = 1.0;
  std::int64_t day_ticks = 86400;
  std::int64_t daylight_ticks = 43200;
  std::int64_t offset = 0;
  std::string path;

  HarvestSource build() const;
  bool operator==(const SourceConfig&) const = default;
};

/// From `start_period` on, the pattern has these peaks and this entry level.
struct ScheduleEntry {
  std::int64_t start_period = 0;
  std::vector<PeakSpec> peaks;
  std::optional<int> entry_level;

  bool operator==(const ScheduleEntry&) const = default;
};

enum class RecordLevel { summary, per_tick };

struct SimConfig {
  PatternParams pattern;
  std::vector<ScheduleEntry> schedule;
  StoreConfig store;
  SourceConfig source;
  PolicyKind policy = PolicyKind::smarton;
  CtidConfig ctid;
  LearnerConfig learner;
  std::vector<QTable> warm_start;
  std::int64_t n_periods = 600;
  std::uint64_t seed = 1;
  RecordLevel record_level = RecordLevel::summary;
  // Stop once a learning policy has spent this many consecutive periods in
  // phase 3 (0 = always run n_periods).
  int stop_after_stable = 5;
  // Periods at the end of a run that compute_metrics summarizes for reports.
  int eval_periods = 5;

  bool operator==(const SimConfig&) const = default;
};

/// Throws ValidationError.
void validate(const SimConfig& config);

struct TickRecord {
  bool awake = false;
  bool event = false;
  bool skipped = false;
  double drawn = 0.0;
  double harvested = 0.0;
  double stored = 0.0;
  int phase = 0;
  int slot = 0;
  int step = 0;
};

struct PeriodLog {
  std::int64_t period = 0;
  int phase = 0;      // at period start
  int phase_end = 0;  // after period-end transitions
  std::int64_t awake_ticks = 0;
  std::int64_t event_ticks = 0;
  std::int64_t catches = 0;
  std::int64_t skipped_wakeups = 0;
  std::int64_t no_event_wakeups = 0;
  double stored_start = 0.0;
  double stored_end = 0.0;
  double offered = 0.0;
  double harvested = 0.0;  // entered storage: offered minus conversion and redistribution losses
  double drawn = 0.0;
  double spent = 0.0;  // wake cost of every awake tick, paid or not
  double spent_on_events = 0.0;
  double wasted_saturation = 0.0;
  double wasted_entry_control = 0.0;
  double conversion_loss = 0.0;
  double redistribution_loss = 0.0;
  int activations = 0;
  std::vector<TickRecord> ticks;  // per-tick record level only
  std::vector<EpisodeRecord> episodes;

  std::int64_t misses() const { return event_ticks - catches; }
  int learning_episodes() const;
};

struct Metrics {
  std::int64_t periods = 0;
  std::int64_t total_catches = 0;
  std::int64_t awake_ticks = 0;
  std::int64_t event_ticks = 0;
  double energy_efficiency = 0.0;
  std::int64_t skipped_wakeups = 0;
  std::int64_t no_event_wakeups = 0;
  std::array<std::int64_t, 4> periods_in_phase{};  // index = phase, 0 for baselines
  std::int64_t phase2_episodes = 0;
};

/// Efficiency = energy spent at event ticks / energy spent at awake ticks (0 if none).
Metrics compute_metrics(std::span<const PeriodLog> logs);

class Simulation {
 public:
  explicit Simulation(const SimConfig& config);

  /// Runs period `k` (0 <= k < n_periods).
  PeriodLog run_period(std::int64_t k);

  const SimConfig& config() const { return config_; }
  const EventTrace& trace() const { return trace_; }
  EnergyStore& store() { return store_; }
  const EnergyStore& store() const { return store_; }
  Policy& policy() { return *policy_; }
  /// Non-null for SmartON and CTIDpro.
  SmartOnPolicy* learner() { return learner_; }
  const SmartOnPolicy* learner() const { return learner_; }
  int slot_ticks() const { return slot_ticks_; }
  /// Pattern active in period k.
  const EventPattern& pattern_at(std::int64_t k) const;
  std::optional<int> entry_level_at(std::int64_t k) const;
  /// Replaces the entry level for all following periods.
  void set_entry_level(std::optional<int> level) { override_level_ = level; has_override_ = true; }

 private:
  struct Segment {
    std::int64_t start = 0;
    EventPattern pattern;
    std::optional<int> entry_level;
    std::vector<int> peak_starts;  // tick in period
  };
  const Segment& segment_at(std::int64_t k) const;

  SimConfig config_;
  std::vector<Segment> segments_;
  EventTrace trace_;
  EnergyStore store_;
  HarvestSource source_;
  std::unique_ptr<Policy> policy_;
  SmartOnPolicy* learner_ = nullptr;
  int slot_ticks_ = 30;
  bool has_override_ = false;
  std::optional<int> override_level_;
};

std::unique_ptr<Policy> make_policy(const SimConfig& config, const EnergyStore& store);

/// Same as sim.run_period(period_index).
PeriodLog run_period(Simulation& sim, std::int64_t period_index);

struct ExperimentResult {
  std::vector<PeriodLog> periods;
  std::map<ShapeKey, QTable> tables;
  std::vector<DetectedPeak> detected_peaks;
  int phase1_sessions = 0;
  bool stopped_early = false;

  /// Metrics over the last `n` periods (all periods when n <= 0).
  Metrics tail_metrics(int n) const;
};

/// Runs periods until n_periods or the stability stopping rule. Pattern
/// schedule entries are always reached before the run may stop.
ExperimentResult run_experiment(const SimConfig& config);

struct EntryConvergence {
  std::string shape;
  int entry_level = 0;
  int episodes = 0;
  bool converged = false;
  int episodes_to_converge = 0;
  int learn_order = 0;
};

struct ConvergenceStats {
  std::vector<EntryConvergence> entries;
  std::vector<int> phase1_passes;  // per Phase-1 session, in order
  std::int64_t phase2_episodes = 0;
};

ConvergenceStats convergence_stats(const ExperimentResult& result);

}  // namespace smarton

#pragma once

// Three-phase learning: slot profiling, per-shape partitioned Q-learning,
// exploitation with probing, and the transitions between them.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "smarton/energy_model.hpp"
#include "smarton/event_world.hpp"
#include "smarton/rng.hpp"

namespace smarton {

enum class Phase : int { profiling = 1, learning = 2, exploiting = 3 };

class EmptyPeak : public std::invalid_argument {
 public:
  EmptyPeak() : std::invalid_argument("peak counts are all at the noise floor") {}
};

class InvalidTransition : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// H/L signature of an event peak; one Q-table per key.
struct ShapeKey {
  Signature signature;

  int length() const { return static_cast<int>(signature.size()); }
  std::string str() const { return to_string(signature); }
  static ShapeKey parse(std::string_view text) { return ShapeKey{parse_signature(text)}; }

  auto operator<=>(const ShapeKey&) const = default;
  bool operator==(const ShapeKey&) const = default;
};

/// Wake-up frequencies in Hz, action 0 first. Strictly increasing, starts at 0.
struct ActionSet {
  std::vector<double> frequencies{0.0, 0.2, 0.5, 1.0};

  int size() const { return static_cast<int>(frequencies.size()); }
  int highest() const { return size() - 1; }
  int lowest_nonzero() const { return 1; }
  void validate() const;

  bool operator==(const ActionSet&) const = default;
};

/// Offsets in [0, slot_ticks) at which a device waking at `frequency` is
/// awake: ceil(k / frequency) for k = 0, 1, ...
std::vector<int> wake_offsets(double frequency, int slot_ticks);
int wake_count(double frequency, int slot_ticks);

struct LearnerConfig {
  double alpha = 0.7;
  double gamma = 0.618;
  double reward_catch = 10.0;
  double reward_miss = -1.0;
  int levels = 4;  // K
  int state_duration = 30;
  ActionSet actions;
  // Partition convergence: an update is quiet when
  //   |dQ| <= max(convergence_epsilon, convergence_rel_tol * max_a |Q[s, a]|).
  double convergence_epsilon = 0.1;
  double convergence_rel_tol = 0.2;
  int convergence_window = 5;
  // Profile convergence over the last `profile_window` complete profiles.
  int profile_window = 2;
  double profile_rel_tol = 0.25;
  double profile_abs_tol = 2.0;
  double shape_threshold = 0.5;  // theta
  double noise_floor = 0.0;
  int peak_max_duration = 120;
  int probe_budget = 2;
  int probe_trigger = 1;
  // Keep learning after a partition converges (convergence studies).
  bool hold_learning = false;

  int max_peak_steps() const { return peak_max_duration / state_duration; }
  /// (max per-step reward) / (1 - gamma)
  double q_bound() const;

  bool operator==(const LearnerConfig&) const = default;
};

/// Throws std::invalid_argument naming the offending field.
void validate(const LearnerConfig& config);

class SlotProfile {
 public:
  explicit SlotProfile(int slots = 0);

  int slots() const { return static_cast<int>(counts_.size()); }
  const std::vector<int>& counts() const { return counts_; }
  const std::vector<bool>& visited() const { return visited_; }
  bool is_visited(int slot) const { return visited_.at(static_cast<std::size_t>(slot)); }
  /// Periods spent profiling since this profile was created.
  int passes() const { return passes_; }
  /// Counts of every completed full profile, oldest first.
  const std::vector<std::vector<int>>& history() const { return history_; }
  bool round_complete() const;

  /// Stores the catches of a profiled slot; the round that this completes is
  /// appended to the history. Throws std::logic_error if the slot was already
  /// visited in the current round.
  void record(int slot, int count);
  /// Closes a period.
  void finish_pass() { ++passes_; }
  /// Starts a fresh round: counts and visited flags are cleared.
  void start_round();
  /// Per-slot mean over the last `window` completed profiles.
  std::vector<double> mean_recent(int window) const;

 private:
  std::vector<int> counts_;
  std::vector<bool> visited_;
  int passes_ = 0;
  std::vector<std::vector<int>> history_;
};

bool profile_converged(const SlotProfile& profile, const LearnerConfig& config);

/// Each step is H when its count >= theta * max(counts). Throws EmptyPeak.
ShapeKey classify_shape(std::span<const double> counts, double theta, double noise_floor = 0.0);

struct DetectedPeak {
  int start_slot = 0;
  ShapeKey shape;

  int length() const { return shape.length(); }
  bool operator==(const DetectedPeak&) const = default;
};

/// Contiguous runs of slots above the noise floor, split into chunks of at
/// most `max_steps` slots, each classified.
std::vector<DetectedPeak> detect_peaks(std::span<const double> counts, const LearnerConfig& config);

/// Convergence bookkeeping for the episodes entered at one energy level.
struct EntryPartition {
  int episodes = 0;
  int quiet_streak = 0;
  bool converged = false;
  int episodes_to_converge = 0;
  int learn_order = 0;  // 1 = first level of this table to converge
  // Per state: how many leading actions were affordable the last time an
  // episode entered at this level passed through it (0 = never seen).
  std::vector<std::uint8_t> reach;

  bool operator==(const EntryPartition&) const = default;
};

class QTable {
 public:
  QTable(ShapeKey shape, int levels, int actions);

  const ShapeKey& shape() const { return shape_; }
  int levels() const { return levels_; }
  int steps() const { return shape_.length(); }
  int actions() const { return actions_; }
  int rows() const { return levels_ * steps(); }

  /// Row index (level - 1) * T + (step - 1); level and step are 1-based.
  int state(int level, int step) const;
  int level_of(int state) const { return state / steps() + 1; }
  int step_of(int state) const { return state % steps() + 1; }

  double value(int state, int action) const { return values_[index(state, action)]; }
  void set_value(int state, int action, double v) { values_[index(state, action)] = v; }
  std::span<const double> row(int state) const {
    return std::span<const double>(values_).subspan(static_cast<std::size_t>(state * actions_),
                                                    static_cast<std::size_t>(actions_));
  }
  bool touched(int state, int action) const { return touched_[index(state, action)] != 0; }
  void mark_touched(int state, int action) { touched_[index(state, action)] = 1; }
  int touched_count() const;

  EntryPartition& partition(int level) { return partitions_.at(static_cast<std::size_t>(level - 1)); }
  const EntryPartition& partition(int level) const { return partitions_.at(static_cast<std::size_t>(level - 1)); }
  int converged_levels() const;
  /// Notes that an episode entered at `entry_level` reached `state` with
  /// `affordable` leading actions on offer.
  void note_visit(int entry_level, int state, int affordable);
  /// Every action on offer in every state the partition has reached was tried.
  bool partition_covered(int entry_level) const;
  bool fully_converged() const { return converged_levels() == levels_; }
  int next_learn_order() { return ++learn_order_counter_; }

  /// Header "qtable shape=<sig> K=<k> T=<t> N=<n> alpha=<a> gamma=<g>", then
  /// one "<level> <step> <v_1> ... <v_N>" row per state, 6 decimals.
  std::string serialize(double alpha, double gamma) const;
  static QTable parse(std::string_view text);

  bool operator==(const QTable&) const = default;

 private:
  std::size_t index(int state, int action) const {
    return static_cast<std::size_t>(state * actions_ + action);
  }

  ShapeKey shape_;
  int levels_;
  int actions_;
  std::vector<double> values_;
  std::vector<std::uint8_t> touched_;
  std::vector<EntryPartition> partitions_;
  int learn_order_counter_ = 0;
};

/// Same as table.state(level, step).
int get_state(int level, int step, const QTable& table);

struct StepReward {
  double reward = 0.0;
  int catches = 0;
  int awake = 0;
};

/// Reward of one awake instant.
inline double instant_reward(bool event, const LearnerConfig& config) {
  return event ? config.reward_catch : config.reward_miss;
}

/// Sum over awake instants of reward_catch (event) or reward_miss (none).
/// Every awake tick must lie in [window_begin, window_end).
StepReward step_reward(std::span<const std::int64_t> awake_ticks, const EventTrace& trace,
                       std::int64_t window_begin, std::int64_t window_end, const LearnerConfig& config);

struct QUpdate {
  double before = 0.0;
  double after = 0.0;
  bool quiet = false;
};

/// Q[s,a] <- (1 - alpha) Q[s,a] + alpha (R + gamma max_k Q[s', k]);
/// the bootstrap term is zero when `next_state` is empty (last step). When
/// `next_actions` > 0 the max runs over actions 0..next_actions-1 only, i.e.
/// those the store can fund on entering s'.
QUpdate q_update(QTable& table, int state, int action, double reward, std::optional<int> next_state,
                 const LearnerConfig& config, int next_actions = 0);

/// Number of leading actions whose full-slot cost is covered by `stored`.
int affordable_actions(std::span<const double> costs, double stored);

/// Energy for one full slot of each action.
std::vector<double> action_costs(const LearnerConfig& config, double wake_cost);

/// Phase 2: uniform over affordable actions. Phase 3: argmax over affordable
/// actions, ties to the lower frequency. Action 0 is always affordable.
int choose_action(const QTable& table, int state, Phase phase, double stored, std::span<const double> costs,
                  CounterRng& rng);

bool partition_converged(const QTable& table, int entry_level);

/// Books one finished episode; returns true when it made the partition
/// converge, which takes `convergence_window` consecutive quiet episodes and
/// a covered partition.
bool record_episode(QTable& table, int entry_level, bool all_updates_quiet, const LearnerConfig& config);

struct PhaseContext {
  Phase phase = Phase::profiling;
  SlotProfile profile;
  std::map<ShapeKey, QTable> tables;
  std::vector<DetectedPeak> peaks;
  std::vector<int> peak_of_slot;         // -1 outside every known peak
  std::map<ShapeKey, int> entry_levels;  // latest entry level per shape
  bool last_profile_was_drift = false;
  int phase1_sessions = 1;
  int phase2_episodes = 0;

  int slots() const { return static_cast<int>(peak_of_slot.size()); }
  QTable& table_for(const ShapeKey& shape, const LearnerConfig& config);
};

PhaseContext make_context(int slots);

struct ProfileConvergedObs {
  std::vector<DetectedPeak> peaks;
};
struct PartitionConvergedObs {};
struct ProbeCaughtObs {
  int caught = 0;
};
struct ProbeQuietObs {};
using Observation = std::variant<ProfileConvergedObs, PartitionConvergedObs, ProbeCaughtObs, ProbeQuietObs>;

/// Throws InvalidTransition for pairs outside the phase diagram.
void phase_transition(PhaseContext& ctx, const Observation& observation, const LearnerConfig& config);

/// Up to probe_budget slots outside every known peak, ascending.
std::vector<int> probe_plan(const PhaseContext& ctx, const LearnerConfig& config, CounterRng& rng);

/// Energy for one full slot at the highest frequency.
double profile_cost(const LearnerConfig& config, double wake_cost);

/// Alg. 1 guard: enough energy and not yet visited in this round.
bool should_profile(const PhaseContext& ctx, int slot, double stored, const LearnerConfig& config,
                    double wake_cost);

/// Period-end bookkeeping: counts the pass and, when the round is complete
/// but the profile has not converged, starts a new round. Returns whether
/// the profile converged.
bool close_profile_pass(PhaseContext& ctx, const LearnerConfig& config);

struct ProfilePassSummary {
  int slots_profiled = 0;
  int catches = 0;
  bool round_complete = false;
  bool converged = false;
};

/// Runs one period of profiling against `store`. Slots are profiled at the
/// highest frequency when should_profile allows it; otherwise the device
/// sleeps and harvests. Ticks are [period_index * P, (period_index + 1) * P).
ProfilePassSummary run_profile_pass(PhaseContext& ctx, EnergyStore& store, const HarvestSource& source,
                                    const EventTrace& trace, std::int64_t period_index, int period_ticks,
                                    const LearnerConfig& config);

}  // namespace smarton

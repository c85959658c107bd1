#pragma once

// Wake-up policies behind one per-tick interface: the ground-truth oracle,
// charging-then-immediate-discharging (CTID), CTID restricted to profiled
// slots (CTIDpro), and the three-phase learner (SmartON).

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smarton/energy_model.hpp"
#include "smarton/event_world.hpp"
#include "smarton/learner.hpp"
#include "smarton/rng.hpp"

namespace smarton {

enum class PolicyKind { smarton, ctid, ctidpro, gt };

std::string to_string(PolicyKind kind);
/// Throws std::invalid_argument listing the valid names.
PolicyKind parse_policy(std::string_view name);

struct WakeDecision {
  std::vector<std::int64_t> awake_instants;
  double energy_drawn = 0.0;
};

/// Position of one tick inside the period and slot grid.
struct TickView {
  std::int64_t tick = 0;
  std::int64_t period = 0;
  int tick_in_period = 0;
  int slot = 0;
  int offset = 0;  // tick within the slot
  int slot_ticks = 30;

  bool slot_start() const { return offset == 0; }
  bool slot_end() const { return offset == slot_ticks - 1; }
};

TickView tick_view(std::int64_t tick, int period_ticks, int slot_ticks);

struct EpisodeRecord {
  std::int64_t period = 0;
  std::string shape;
  int peak_start_slot = 0;
  int entry_level = 0;
  bool learning = false;
  std::vector<int> actions;
  double reward = 0.0;
  int catches = 0;
};

class Policy {
 public:
  virtual ~Policy() = default;

  virtual PolicyKind kind() const = 0;
  /// GT is awake without paying for it.
  virtual bool debits_energy() const { return true; }
  /// 1, 2 or 3 for learning policies; 0 otherwise.
  virtual int phase() const { return 0; }

  virtual void begin_period(std::int64_t /*period*/, const EnergyStore& /*store*/) {}
  /// Decision for one tick, taken on the store as it is at the start of the tick.
  virtual bool wants_wake(const TickView& view, const EnergyStore& store) = 0;
  /// Called once per tick after the draw or harvest.
  virtual void observe(const TickView& /*view*/, bool /*awake*/, bool /*event*/, const EnergyStore& /*store*/) {}
  virtual void end_period(std::int64_t /*period*/, const EnergyStore& /*store*/) {}

  /// Step (1..T) of the detected peak covering the current slot, 0 outside.
  virtual int current_step() const { return 0; }
  virtual std::vector<EpisodeRecord> take_episodes() { return {}; }
};

/// Awake at every tick of [begin, end); no energy is drawn.
WakeDecision gt_schedule(std::int64_t begin, std::int64_t end);

class GtPolicy final : public Policy {
 public:
  PolicyKind kind() const override { return PolicyKind::gt; }
  bool debits_energy() const override { return false; }
  bool wants_wake(const TickView&, const EnergyStore&) override { return true; }
};

struct CtidConfig {
  double e_on = 30.0;
  double e_off = 0.0;
  double discharge_frequency = 1.0;

  /// Throws std::invalid_argument unless e_off < e_on <= capacity.
  void validate(double capacity) const;
  bool operator==(const CtidConfig&) const = default;
};

struct CtidState {
  bool discharging = false;
  std::int64_t discharge_start = 0;
};

/// Mode update and wake decision for one tick; the store is not touched.
bool ctid_decide(CtidState& state, double stored, double wake_cost, const CtidConfig& config, std::int64_t tick);

/// ctid_decide followed by the draw. Harvesting is the caller's job.
WakeDecision ctid_step(CtidState& state, EnergyStore& store, const CtidConfig& config, std::int64_t tick);

class CtidPolicy final : public Policy {
 public:
  explicit CtidPolicy(CtidConfig config) : config_(config) {}

  PolicyKind kind() const override { return PolicyKind::ctid; }
  bool wants_wake(const TickView& view, const EnergyStore& store) override {
    return ctid_decide(state_, store.stored(), store.wake_cost(), config_, view.tick);
  }
  const CtidState& state() const { return state_; }

 private:
  CtidConfig config_;
  CtidState state_;
};

/// SmartON: profiling, then per-shape Q-learning, then exploitation with
/// probes. CTIDpro derives from it and replaces learning with greedy spending.
class SmartOnPolicy : public Policy {
 public:
  SmartOnPolicy(LearnerConfig config, int period_ticks, double capacity, double wake_cost, std::uint64_t seed);

  PolicyKind kind() const override { return PolicyKind::smarton; }
  int phase() const override { return static_cast<int>(ctx_.phase); }

  void begin_period(std::int64_t period, const EnergyStore& store) override;
  bool wants_wake(const TickView& view, const EnergyStore& store) override;
  void observe(const TickView& view, bool awake, bool event, const EnergyStore& store) override;
  void end_period(std::int64_t period, const EnergyStore& store) override;
  int current_step() const override { return current_step_; }
  std::vector<EpisodeRecord> take_episodes() override;

  const PhaseContext& context() const { return ctx_; }
  const LearnerConfig& config() const { return config_; }
  int slot_ticks() const { return config_.state_duration; }

  /// Skips profiling: the given peaks are treated as a converged profile.
  void assume_profile(std::vector<DetectedPeak> peaks);
  /// Installs a previously learned table; every entry level counts as converged.
  void warm_start(QTable table);

 protected:
  enum class SlotPlan { sleep, profile, act, greedy, probe };

  /// Plan for a slot inside detected peak `peak_index` at `step` (1-based).
  virtual SlotPlan plan_peak_slot(int peak_index, int step, const EnergyStore& store);
  virtual void after_profile_converged();
  virtual bool greedy_wake(const TickView& /*view*/, const EnergyStore& /*store*/) { return false; }
  virtual bool probes_enabled() const { return true; }
  void transition(const Observation& observation);

  PhaseContext ctx_;
  LearnerConfig config_;

 private:
  struct Episode {
    bool active = false;
    int peak = -1;
    ShapeKey shape;
    int entry_level = 1;
    int state = 0;
    bool all_quiet = true;
    EpisodeRecord record;
  };

  void finish_slot(const TickView& view, const EnergyStore& store);

  int period_ticks_;
  std::int64_t period_ = 0;
  double capacity_;
  double wake_cost_;
  CounterRng explore_;
  CounterRng probe_rng_;
  std::vector<double> costs_;
  std::vector<std::vector<std::uint8_t>> schedule_;  // per action, awake flag per offset
  std::vector<int> probes_;
  int probe_catches_ = 0;

  SlotPlan plan_ = SlotPlan::sleep;
  int action_ = 0;
  int current_step_ = 0;
  int slot_catches_ = 0;
  int slot_awake_ = 0;
  Episode episode_;
  std::vector<EpisodeRecord> finished_;
};

/// Profiles like SmartON; inside detected peak slots it runs the CTID
/// turn-on/turn-off cycle, and it never wakes outside them.
class CtidProPolicy final : public SmartOnPolicy {
 public:
  CtidProPolicy(LearnerConfig config, int period_ticks, double capacity, double wake_cost, std::uint64_t seed,
                CtidConfig ctid)
      : SmartOnPolicy(std::move(config), period_ticks, capacity, wake_cost, seed), ctid_(ctid) {}
  PolicyKind kind() const override { return PolicyKind::ctidpro; }

 protected:
  SlotPlan plan_peak_slot(int peak_index, int step, const EnergyStore& store) override;
  bool greedy_wake(const TickView& view, const EnergyStore& store) override;
  void after_profile_converged() override;
  bool probes_enabled() const override { return false; }

 private:
  CtidConfig ctid_;
  CtidState state_;
};

/// One tick as the simulation engine runs it: decide on the store at the start
/// of the tick; an awake tick draws one wake cost (GT draws nothing), any
/// other tick harvests. A wake-up the store cannot fund is skipped and the
/// tick harvests instead. The policy then observes the tick and `event`.
struct TickOutcome {
  bool awake = false;
  bool skipped = false;
  double drawn = 0.0;
  HarvestOutcome harvest;
};

TickOutcome policy_step(Policy& policy, EnergyStore& store, const HarvestSource& source, const TickView& view,
                        bool event);

}  // namespace smarton

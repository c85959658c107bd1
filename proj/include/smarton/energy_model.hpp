#pragma once

// Harvested-energy inflow and stored-energy outflow.
//
// Two storage flavors share one interface (EnergyStore): an abstract store
// counted in wake-up costs, and a capacitor array that activates capacitors in
// ascending capacitance as the shared voltage crosses an activation threshold.
// Per tick the inflow offered to either flavor is
//   intensity(tick) * wake_cost / charging_ratio
// so a unit-intensity source funds one wake-up every `charging_ratio` ticks.

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace smarton {

/// Slack used in every energy comparison to absorb accumulated rounding.
inline constexpr double kEnergyEpsilon = 1e-9;

class NoInactiveCapacitor : public std::logic_error {
 public:
  NoInactiveCapacitor() : std::logic_error("no inactive capacitor left in the array") {}
};

struct HarvestOutcome {
  double offered = 0.0;              // energy presented by the source
  double conversion_loss = 0.0;      // (1 - eta) share, array only
  double redistribution_loss = 0.0;  // lost while activating capacitors
  double wasted_saturation = 0.0;    // discarded because the store was full
  int activations = 0;

  /// Energy that entered storage before saturation clipping.
  double net_inflow() const { return offered - conversion_loss - redistribution_loss; }
};

class AbstractStore {
 public:
  AbstractStore(double capacity, double charging_ratio, double wake_cost = 1.0,
                double initial = 0.0);

  double stored() const { return stored_; }
  double capacity() const { return capacity_; }
  double charging_ratio() const { return charging_ratio_; }
  double wake_cost() const { return wake_cost_; }

  HarvestOutcome harvest(double energy);
  bool try_draw(double amount);
  double clamp_to(double ceiling);

  bool operator==(const AbstractStore&) const = default;

 private:
  double stored_;
  double capacity_;
  double charging_ratio_;
  double wake_cost_;
};

struct Capacitor {
  double capacitance = 0.0;  // farads
  bool active = false;

  bool operator==(const Capacitor&) const = default;
};

struct ArrayParams {
  std::vector<double> capacitances;  // farads, any order
  double v_activate = 2.8;
  double v_max = 3.3;

  bool operator==(const ArrayParams&) const = default;
};

/// Capacitances for a named preset ("image" or "audio"), in farads.
ArrayParams array_preset(std::string_view name);

class CapacitorArray {
 public:
  /// Capacitors are sorted ascending; the smallest one starts active.
  CapacitorArray(ArrayParams params, double charging_ratio, double wake_cost,
                 double initial_voltage = 0.0);

  std::span<const Capacitor> capacitors() const { return capacitors_; }
  int active_count() const { return active_; }
  bool has_inactive() const { return active_ < static_cast<int>(capacitors_.size()); }
  double active_capacitance() const { return active_capacitance_; }
  double total_capacitance() const;
  double voltage() const { return voltage_; }
  double v_activate() const { return v_activate_; }
  double v_max() const { return v_max_; }
  double charging_ratio() const { return charging_ratio_; }
  double wake_cost() const { return wake_cost_; }

  /// 1/2 * (sum of active capacitances) * V^2
  double stored() const { return 0.5 * active_capacitance_ * voltage_ * voltage_; }
  /// Energy with every capacitor active at v_max.
  double capacity() const { return 0.5 * total_capacitance() * v_max_ * v_max_; }

  /// eta(V) = 1 - V / (2 v_max)
  double charging_efficiency(double v) const { return 1.0 - v / (2.0 * v_max_); }

  HarvestOutcome harvest(double energy);
  bool try_draw(double amount);
  double clamp_to(double ceiling);

  /// Connects the smallest inactive capacitor with charge conservation.
  /// Returns the redistribution loss. Throws NoInactiveCapacitor.
  double activate_next_capacitor();

 private:
  void set_energy(double energy);

  std::vector<Capacitor> capacitors_;
  int active_ = 1;
  double active_capacitance_ = 0.0;
  double voltage_ = 0.0;
  double v_activate_;
  double v_max_;
  double charging_ratio_;
  double wake_cost_;
};

/// One of the two storage flavors.
class EnergyStore {
 public:
  EnergyStore(AbstractStore store) : impl_(std::move(store)) {}
  EnergyStore(CapacitorArray array) : impl_(std::move(array)) {}

  double stored() const;
  double capacity() const;
  double charging_ratio() const;
  double wake_cost() const;

  /// Energy offered to the store by one tick at the given source intensity.
  double inflow(double intensity) const { return intensity * wake_cost() / charging_ratio(); }

  HarvestOutcome harvest(double energy);
  /// Debits `amount` when stored >= amount; otherwise leaves the store untouched.
  [[nodiscard]] bool try_draw(double amount);
  /// Lowers stored energy to at most `ceiling`; returns the discarded energy.
  double clamp_to(double ceiling);

  bool is_array() const { return std::holds_alternative<CapacitorArray>(impl_); }
  const CapacitorArray* array() const { return std::get_if<CapacitorArray>(&impl_); }

 private:
  std::variant<AbstractStore, CapacitorArray> impl_;
};

enum class SourceKind { constant, diurnal, trace };

/// Nonnegative harvest intensity per tick (1.0 = nominal).
class HarvestSource {
 public:
  static HarvestSource constant(double intensity);
  /// Half-sine of height `amplitude` over the first `daylight_ticks` of each
  /// `day_ticks` cycle, zero at night. `offset` shifts the cycle start.
  static HarvestSource diurnal(double amplitude, std::int64_t day_ticks, std::int64_t daylight_ticks,
                               std::int64_t offset = 0);
  /// Cyclic replay of `samples`.
  static HarvestSource from_samples(std::vector<double> samples);
  /// One nonnegative value per line; '#' starts a comment.
  static HarvestSource load_trace(const std::filesystem::path& path);

  SourceKind kind() const { return kind_; }
  double intensity(std::int64_t tick) const;

 private:
  SourceKind kind_ = SourceKind::constant;
  double amplitude_ = 1.0;
  std::int64_t day_ticks_ = 1;
  std::int64_t daylight_ticks_ = 1;
  std::int64_t offset_ = 0;
  std::vector<double> samples_;
};

HarvestOutcome harvest_tick(EnergyStore& store, const HarvestSource& source, std::int64_t tick);

/// ceil(K * stored / capacity) clamped to [1, K]; an empty store is level 1.
int quantize_level(double stored, double capacity, int levels);

/// Upper edge of `level`'s bin, i.e. the largest energy that quantizes to it.
double level_ceiling(int level, double capacity, int levels);

}  // namespace smarton

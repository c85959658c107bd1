#include "smarton/energy_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace smarton {

AbstractStore::AbstractStore(double capacity, double charging_ratio, double wake_cost, double initial)
    : stored_(initial), capacity_(capacity), charging_ratio_(charging_ratio), wake_cost_(wake_cost) {
  if (!(capacity > 0.0)) throw std::invalid_argument("store capacity must be > 0");
  if (!(charging_ratio > 0.0)) throw std::invalid_argument("charging ratio must be > 0");
  if (!(wake_cost > 0.0)) throw std::invalid_argument("wake cost must be > 0");
  if (initial < 0.0 || initial > capacity) throw std::invalid_argument("initial energy outside [0, capacity]");
}

HarvestOutcome AbstractStore::harvest(double energy) {
  HarvestOutcome out;
  out.offered = energy;
  const double next = stored_ + energy;
  if (next > capacity_) {
    out.wasted_saturation = next - capacity_;
    stored_ = capacity_;
  } else {
    stored_ = next;
  }
  return out;
}

bool AbstractStore::try_draw(double amount) {
  if (amount < 0.0) throw std::invalid_argument("draw amount must be >= 0");
  if (stored_ + kEnergyEpsilon < amount) return false;
  stored_ = std::max(0.0, stored_ - amount);
  return true;
}

double AbstractStore::clamp_to(double ceiling) {
  if (stored_ <= ceiling) return 0.0;
  const double removed = stored_ - ceiling;
  stored_ = ceiling;
  return removed;
}

ArrayParams array_preset(std::string_view name) {
  if (name == "image") return ArrayParams{{0.012, 0.012, 0.047, 0.047, 0.110}, 2.8, 3.3};
  if (name == "audio") return ArrayParams{{0.0047, 0.012, 0.012, 0.047}, 2.8, 3.3};
  throw std::invalid_argument("unknown capacitor preset '" + std::string(name) + "' (valid: image, audio)");
}

CapacitorArray::CapacitorArray(ArrayParams params, double charging_ratio, double wake_cost,
                               double initial_voltage)
    : v_activate_(params.v_activate),
      v_max_(params.v_max),
      charging_ratio_(charging_ratio),
      wake_cost_(wake_cost) {
  if (params.capacitances.empty()) throw std::invalid_argument("capacitor array needs at least one capacitor");
  if (!(params.v_max > 0.0)) throw std::invalid_argument("v_max must be > 0");
  if (!(params.v_activate > 0.0) || params.v_activate > params.v_max)
    throw std::invalid_argument("v_activate must lie in (0, v_max]");
  if (!(charging_ratio > 0.0)) throw std::invalid_argument("charging ratio must be > 0");
  if (!(wake_cost > 0.0)) throw std::invalid_argument("wake cost must be > 0");
  std::sort(params.capacitances.begin(), params.capacitances.end());
  for (double c : params.capacitances) {
    if (c < 0.0) throw std::invalid_argument("capacitance must be >= 0");
    capacitors_.push_back(Capacitor{c, false});
  }
  if (!(capacitors_.front().capacitance > 0.0) && capacitors_.size() == 1)
    throw std::invalid_argument("the always-active capacitor must have capacitance > 0");
  capacitors_.front().active = true;
  active_capacitance_ = capacitors_.front().capacitance;
  if (initial_voltage < 0.0 || initial_voltage > v_max_) throw std::invalid_argument("initial voltage outside [0, v_max]");
  voltage_ = initial_voltage;
}

double CapacitorArray::total_capacitance() const {
  double sum = 0.0;
  for (const auto& c : capacitors_) sum += c.capacitance;
  return sum;
}

void CapacitorArray::set_energy(double energy) {
  energy = std::max(0.0, energy);
  voltage_ = active_capacitance_ > 0.0 ? std::sqrt(2.0 * energy / active_capacitance_) : 0.0;
}

double CapacitorArray::activate_next_capacitor() {
  if (!has_inactive()) throw NoInactiveCapacitor();
  const double before = stored();
  const double charge = active_capacitance_ * voltage_;
  auto& next = capacitors_[static_cast<std::size_t>(active_)];
  next.active = true;
  ++active_;
  const double grown = active_capacitance_ + next.capacitance;
  if (grown > 0.0) voltage_ = charge / grown;
  active_capacitance_ = grown;
  return before - stored();
}

HarvestOutcome CapacitorArray::harvest(double energy) {
  HarvestOutcome out;
  out.offered = energy;
  if (energy <= 0.0) return out;
  const double eta = charging_efficiency(voltage_);
  const double accepted = eta * energy;
  out.conversion_loss = energy - accepted;
  set_energy(stored() + accepted);
  while (voltage_ > v_activate_ && has_inactive()) {
    out.redistribution_loss += activate_next_capacitor();
    ++out.activations;
  }
  if (voltage_ > v_max_) {
    const double full = 0.5 * active_capacitance_ * v_max_ * v_max_;
    out.wasted_saturation = stored() - full;
    voltage_ = v_max_;
  }
  return out;
}

bool CapacitorArray::try_draw(double amount) {
  if (amount < 0.0) throw std::invalid_argument("draw amount must be >= 0");
  const double e = stored();
  if (e + kEnergyEpsilon < amount) return false;
  set_energy(e - amount);
  return true;
}

double CapacitorArray::clamp_to(double ceiling) {
  const double e = stored();
  if (e <= ceiling) return 0.0;
  set_energy(ceiling);
  return e - stored();
}

double EnergyStore::stored() const {
  return std::visit([](const auto& s) { return s.stored(); }, impl_);
}
double EnergyStore::capacity() const {
  return std::visit([](const auto& s) { return s.capacity(); }, impl_);
}
double EnergyStore::charging_ratio() const {
  return std::visit([](const auto& s) { return s.charging_ratio(); }, impl_);
}
double EnergyStore::wake_cost() const {
  return std::visit([](const auto& s) { return s.wake_cost(); }, impl_);
}
HarvestOutcome EnergyStore::harvest(double energy) {
  return std::visit([energy](auto& s) { return s.harvest(energy); }, impl_);
}
bool EnergyStore::try_draw(double amount) {
  return std::visit([amount](auto& s) { return s.try_draw(amount); }, impl_);
}
double EnergyStore::clamp_to(double ceiling) {
  return std::visit([ceiling](auto& s) { return s.clamp_to(ceiling); }, impl_);
}

HarvestSource HarvestSource::constant(double intensity) {
  if (!(intensity >= 0.0)) throw std::invalid_argument("source intensity must be >= 0");
  HarvestSource s;
  s.kind_ = SourceKind::constant;
  s.amplitude_ = intensity;
  return s;
}

HarvestSource HarvestSource::diurnal(double amplitude, std::int64_t day_ticks, std::int64_t daylight_ticks,
                                     std::int64_t offset) {
  if (!(amplitude >= 0.0)) throw std::invalid_argument("diurnal amplitude must be >= 0");
  if (day_ticks <= 0 || daylight_ticks <= 0 || daylight_ticks > day_ticks)
    throw std::invalid_argument("diurnal source needs 0 < daylight <= day");
  HarvestSource s;
  s.kind_ = SourceKind::diurnal;
  s.amplitude_ = amplitude;
  s.day_ticks_ = day_ticks;
  s.daylight_ticks_ = daylight_ticks;
  s.offset_ = offset;
  return s;
}

HarvestSource HarvestSource::from_samples(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("harvest trace is empty");
  for (double v : samples)
    if (!(v >= 0.0)) throw std::invalid_argument("harvest trace values must be >= 0");
  HarvestSource s;
  s.kind_ = SourceKind::trace;
  s.samples_ = std::move(samples);
  return s;
}

HarvestSource HarvestSource::load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open harvest trace " + path.string());
  std::vector<double> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    double v = 0.0;
    if (!(fields >> v)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": not a number");
    }
    values.push_back(v);
  }
  return from_samples(std::move(values));
}

double HarvestSource::intensity(std::int64_t tick) const {
  switch (kind_) {
    case SourceKind::constant:
      return amplitude_;
    case SourceKind::diurnal: {
      std::int64_t phase = (tick + offset_) % day_ticks_;
      if (phase < 0) phase += day_ticks_;
      if (phase >= daylight_ticks_) return 0.0;
      const double x = (static_cast<double>(phase) + 0.5) / static_cast<double>(daylight_ticks_);
      return amplitude_ * std::sin(std::numbers::pi * x);
    }
    case SourceKind::trace: {
      const auto n = static_cast<std::int64_t>(samples_.size());
      std::int64_t i = tick % n;
      if (i < 0) i += n;
      return samples_[static_cast<std::size_t>(i)];
    }
  }
  return 0.0;
}

HarvestOutcome harvest_tick(EnergyStore& store, const HarvestSource& source, std::int64_t tick) {
  if (tick < 0) throw std::invalid_argument("harvest_tick: negative tick");
  return store.harvest(store.inflow(source.intensity(tick)));
}

int quantize_level(double stored, double capacity, int levels) {
  if (levels < 2) throw std::invalid_argument("quantize_level: need at least 2 levels");
  if (stored <= 0.0) return 1;
  const double x = static_cast<double>(levels) * stored / capacity;
  const int level = static_cast<int>(std::ceil(x - 1e-9));
  return std::clamp(level, 1, levels);
}

double level_ceiling(int level, double capacity, int levels) {
  return capacity * static_cast<double>(level) / static_cast<double>(levels);
}

}  // namespace smarton

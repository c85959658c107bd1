#pragma once

// Periodic event-arrival patterns built from H/L-shaped probability peaks, and
// per-second Bernoulli realizations of them.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace smarton {

class InvalidSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ProbClass : char { low = 'L', high = 'H' };

using Signature = std::vector<ProbClass>;

std::string to_string(const Signature& steps);
/// Parses a string over {H, L}. Throws InvalidSpec on other characters.
Signature parse_signature(std::string_view text);

struct PeakSpec {
  int start_slot = 0;
  Signature steps;
  std::string shape_name = "custom";

  int length() const { return static_cast<int>(steps.size()); }
  bool operator==(const PeakSpec&) const = default;
};

/// type1 = LHL (bell), type2 = HHH (uniform), type3 = HLL (front-loaded),
/// type4 = LLH (back-loaded). Any other name is parsed as an H/L signature.
PeakSpec make_peak(std::string_view shape, int start_slot);
bool is_canonical_shape(std::string_view name);

struct PatternParams {
  int period_ticks = 1200;
  int state_duration = 30;
  int peak_max_duration = 120;
  double p_high = 0.8;
  double p_low = 0.2;
  double background_rate = 0.0;
  std::vector<PeakSpec> peaks;

  bool operator==(const PatternParams&) const = default;
};

class EventPattern {
 public:
  const PatternParams& params() const { return params_; }
  int period_ticks() const { return params_.period_ticks; }
  int state_duration() const { return params_.state_duration; }
  int slot_count() const { return params_.period_ticks / params_.state_duration; }
  int max_peak_steps() const { return params_.peak_max_duration / params_.state_duration; }
  const std::vector<PeakSpec>& peaks() const { return params_.peaks; }

  /// Event probability for the second at `tick_in_period`.
  double probability_at(int tick_in_period) const { return per_tick_[static_cast<std::size_t>(tick_in_period)]; }

  /// Human-readable provenance tag, e.g. "type1@10+type3@24".
  std::string id() const;

  bool operator==(const EventPattern& other) const { return params_ == other.params_; }

 private:
  friend EventPattern build_pattern(PatternParams params);
  PatternParams params_;
  std::vector<double> per_tick_;
};

/// Validates and freezes a pattern. Throws InvalidSpec.
EventPattern build_pattern(PatternParams params);

EventPattern shift_pattern(const EventPattern& pattern, int delta_slots);
EventPattern morph_pattern(const EventPattern& pattern, std::size_t peak_index, const Signature& steps,
                           std::string shape_name = "custom");

class EventTrace {
 public:
  EventTrace() = default;
  EventTrace(std::vector<std::uint8_t> bits, std::uint64_t seed, std::string pattern_id)
      : bits_(std::move(bits)), seed_(seed), pattern_id_(std::move(pattern_id)) {}

  std::int64_t size() const { return static_cast<std::int64_t>(bits_.size()); }
  std::uint64_t seed() const { return seed_; }
  const std::string& pattern_id() const { return pattern_id_; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  /// Throws std::out_of_range outside [0, size()).
  bool event_at(std::int64_t t) const;
  /// Unchecked lookup for hot loops.
  bool operator[](std::int64_t t) const { return bits_[static_cast<std::size_t>(t)] != 0; }
  std::int64_t count(std::int64_t begin, std::int64_t end) const;

  bool operator==(const EventTrace&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
  std::uint64_t seed_ = 0;
  std::string pattern_id_;
};

/// One pattern per period range; entry i is active from start_period[i] on.
struct PatternSegment {
  std::int64_t start_period = 0;
  EventPattern pattern;
};

/// occurrence(t) = uniform_t < p(t), where uniform_t is draw t of the `trace`
/// substream of `seed`. Patterns therefore share random numbers tick by tick.
EventTrace sample_trace(const EventPattern& pattern, std::uint64_t seed, std::int64_t n_periods);
EventTrace sample_trace(const std::vector<PatternSegment>& segments, std::uint64_t seed,
                        std::int64_t n_periods);

/// Run-length text: header "# length=<n> seed=<s> pattern=<id>", then one
/// "<tick>:<0|1>" line at tick 0 and at every tick where the value changes.
std::string write_rle(const EventTrace& trace);
EventTrace read_rle(std::string_view text);

}  // namespace smarton

#pragma once

// INI scenario files, the preset library and the expansion of sweep axes into
// individual runs.
//
// Sections and keys (all optional; unknown keys are errors):
//
//   name, seed, n_periods, record_level, stop_after_stable, eval_periods
//   [pattern]  period, state_duration, peak_max_duration, p_high, p_low,
//              background_rate, peaks = type1@10, HLH@20
//              schedule = 1000:type3@24/E3; 2000:type1@10/E4
//   [energy]   store, capacity, charging_ratio, wake_cost, initial,
//              array_preset, capacitances, v_activate, v_max, initial_voltage,
//              entry_level, source, intensity, day_ticks, daylight_ticks,
//              offset, trace
//   [learner]  alpha, gamma, reward_catch, reward_miss, levels, state_duration,
//              frequencies, convergence_epsilon, convergence_rel_tol,
//              convergence_window, profile_window, profile_rel_tol,
//              profile_abs_tol, shape_threshold, noise_floor, probe_budget,
//              probe_trigger, hold_learning
//   [policy]   name, ctid_on, ctid_off, ctid_frequency, warm_start
//   [sweep]    study, max_episodes, charging_ratio, entry_level, event_type,
//              state_duration, policy, seed   (comma lists; seed takes a-b)

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "smarton/sim_engine.hpp"

namespace smarton {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// What a sweep runs for each expanded configuration.
enum class StudyKind {
  run,         // run_experiment, metrics over the evaluation window
  conv_ratio,  // Phase-1 passes until the first profile converges
  conv_entry,  // entry levels trained one at a time in shuffled order
  gating,      // random entry level per episode until the whole table converges
};

std::string to_string(StudyKind kind);
StudyKind parse_study(std::string_view text);

struct SweepAxes {
  std::vector<double> charging_ratio;
  std::vector<int> entry_level;  // 0 = no entry control
  std::vector<std::string> event_type;
  std::vector<int> state_duration;  // learner state duration
  std::vector<PolicyKind> policy;
  std::vector<std::uint64_t> seed;

  bool operator==(const SweepAxes&) const = default;
};

struct Scenario {
  std::string name = "custom";
  StudyKind study = StudyKind::run;
  int max_episodes = 1000;  // per entry level for conv_entry, in total for gating
  SimConfig config = default_config();
  std::vector<std::string> warm_start;  // Q-table files
  SweepAxes sweep;

  static SimConfig default_config();
  bool operator==(const Scenario&) const = default;
};

/// Throws ParseError for malformed lines, unknown sections or keys and bad
/// values; ValidationError when the result fails validation.
Scenario parse_config(std::string_view text);
Scenario load_config(const std::filesystem::path& path);

/// Every key with its current value; parse_config(write_config(s)) == s.
std::string write_config(const Scenario& scenario);

/// Checks the base configuration and every expanded run. Throws ValidationError.
void validate(const Scenario& scenario);

std::vector<std::string> preset_names();
bool is_preset(std::string_view name);
/// Throws std::invalid_argument listing the presets.
Scenario preset(std::string_view name);

/// One configuration of a sweep with the axis values that produced it.
struct RunSpec {
  std::size_t index = 0;
  SimConfig config;
  std::string event_type;
};

/// Cartesian product of the non-empty axes over the base configuration, in
/// the order event_type, entry_level, charging_ratio, state_duration, policy,
/// seed (seed varies fastest). Warm-start tables are loaded here.
std::vector<RunSpec> expand(const Scenario& scenario);

/// Name of the pattern in a configuration: the peak shapes, joined by '>'
/// across schedule entries.
std::string event_type_label(const SimConfig& config);

}  // namespace smarton

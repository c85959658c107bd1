#pragma once

// Sweep execution, CSV output and per-figure plot data (.dat and .svg).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "smarton/scenario.hpp"

namespace smarton {

struct TimelineRow {
  std::int64_t period = 0;
  int phase = 0;
  std::int64_t catches = 0;
  std::int64_t misses = 0;
};

struct RunRecord {
  std::string scenario;
  PolicyKind policy = PolicyKind::smarton;
  std::string event_type;
  std::optional<int> entry_level;
  std::uint64_t seed = 0;
  double charging_ratio = 0.0;
  int state_duration = 0;
  std::int64_t last_period = -1;  // final period of the run, -1 when none ran
  Metrics metrics;                // over the evaluation window
  std::vector<TimelineRow> timeline;
};

/// Either an entry-level row (entry_level, learn_order, episodes) or a
/// Phase-1 row (passes); the other fields stay empty.
struct ConvergenceRow {
  std::string scenario;
  std::uint64_t seed = 0;
  double charging_ratio = 0.0;
  std::optional<int> entry_level;
  std::optional<int> learn_order;
  std::optional<int> episodes_to_converge;
  std::optional<int> passes;
};

struct GatingRow {
  std::string scenario;
  std::uint64_t seed = 0;
  int first_exploitable = 0;
  int full_table = 0;
  bool complete = false;
};

struct SweepResult {
  std::vector<RunRecord> runs;
  std::vector<ConvergenceRow> convergence;
  std::vector<GatingRow> gating;

  void append(SweepResult&& other);
};

/// Metrics, timeline and convergence rows of a finished experiment.
SweepResult summarize_run(const Scenario& scenario, const RunSpec& run, const ExperimentResult& result);

/// Executes one expanded configuration of `scenario` for its study kind.
SweepResult run_one(const Scenario& scenario, const RunSpec& run);

/// All runs of the scenario on up to `jobs` threads. The result does not
/// depend on `jobs`: runs are merged in expansion order.
SweepResult run_sweep(const Scenario& scenario, int jobs = 1);

/// Writes metrics.csv, convergence.csv, timeline.csv and, for gating
/// studies, gating.csv. Reals carry 6 decimals. Throws std::runtime_error
/// with the OS message when a file cannot be written.
void emit_csv(const SweepResult& result, const std::filesystem::path& out_dir);

class UnknownPlot : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::vector<std::string> plot_ids();

/// Column names and numeric rows of one figure, plus the SVG rendering.
struct PlotData {
  std::string id;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::string svg;
};

/// Builds a figure from the CSV files in `in_dir`. Throws UnknownPlot for
/// ids outside plot_ids() and std::runtime_error when the inputs are empty.
PlotData make_plot(const std::filesystem::path& in_dir, std::string_view plot_id);

/// make_plot, then writes <id>.dat and (optionally) <id>.svg into `out_dir`.
/// Returns the paths written.
std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& in_dir, std::string_view plot_id,
                                                  const std::filesystem::path& out_dir, bool svg = true);

/// Comma-separated table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Throws std::runtime_error when the column is missing.
  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace smarton

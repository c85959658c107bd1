// smarton_sim: run one configuration, sweep a scenario, or render figure data.
//
//   smarton_sim simulate --config FILE [--seed N] [--policy P] [--out DIR]
//   smarton_sim sweep --scenario PRESET|FILE --out DIR [--jobs N]
//   smarton_sim report --in DIR --plot ID [--out DIR] [--no-svg]
//
// Exit codes: 0 success, 2 invalid input, 1 runtime failure.
// SMARTON_SIM_SEED replaces the configured seed; --seed wins over both.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "smarton/report.hpp"
#include "smarton/scenario.hpp"

namespace {

using namespace smarton;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::optional<std::uint64_t> env_seed() {
  const char* text = std::getenv("SMARTON_SIM_SEED");
  if (text == nullptr || *text == '\0') return std::nullopt;
  char* end = nullptr;
  const auto v = std::strtoull(text, &end, 10);
  if (*end != '\0') throw InputError(std::string("SMARTON_SIM_SEED is not an unsigned integer: ") + text);
  return v;
}

void write_ticks(const std::filesystem::path& path, const ExperimentResult& result) {
  std::ofstream out(path);
  out << "period,tick,awake,event,skipped,drawn,harvested,stored,phase,slot,step\n";
  char buf[256];
  for (const auto& log : result.periods) {
    for (std::size_t i = 0; i < log.ticks.size(); ++i) {
      const TickRecord& t = log.ticks[i];
      std::snprintf(buf, sizeof buf, "%lld,%zu,%d,%d,%d,%.6f,%.6f,%.6f,%d,%d,%d\n", static_cast<long long>(log.period), i,
                    t.awake, t.event, t.skipped, t.drawn, t.harvested, t.stored, t.phase, t.slot, t.step);
      out << buf;
    }
  }
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

int simulate(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& policy,
             const std::string& out_dir) {
  Scenario scenario = load_config(config_path);
  scenario.sweep = SweepAxes{};
  if (const auto s = env_seed()) scenario.config.seed = *s;
  if (seed) scenario.config.seed = *seed;
  if (!policy.empty()) scenario.config.policy = parse_policy(policy);
  validate(scenario);
  const RunSpec run = expand(scenario).front();

  if (scenario.study != StudyKind::run) {
    const SweepResult result = run_one(scenario, run);
    if (!out_dir.empty()) emit_csv(result, out_dir);
    std::printf("%s study, seed %llu: %zu convergence rows\n", to_string(scenario.study).c_str(),
                static_cast<unsigned long long>(run.config.seed), result.convergence.size() + result.gating.size());
    return 0;
  }

  const ExperimentResult result = run_experiment(run.config);
  const Metrics m = result.tail_metrics(run.config.eval_periods);
  std::printf("policy %s, pattern %s, seed %llu: %zu periods%s\n", to_string(run.config.policy).c_str(),
              run.event_type.c_str(), static_cast<unsigned long long>(run.config.seed), result.periods.size(),
              result.stopped_early ? " (stopped on stable phase 3)" : "");
  std::printf("last %lld periods: catches %lld of %lld events, awake %lld s, efficiency %.6f\n",
              static_cast<long long>(m.periods), static_cast<long long>(m.total_catches),
              static_cast<long long>(m.event_ticks), static_cast<long long>(m.awake_ticks), m.energy_efficiency);
  for (const auto& p : result.detected_peaks) std::printf("peak at slot %d: %s\n", p.start_slot, p.shape.str().c_str());

  if (!out_dir.empty()) {
    emit_csv(summarize_run(scenario, run, result), out_dir);
    for (const auto& [shape, table] : result.tables) {
      std::ofstream q(std::filesystem::path(out_dir) / ("qtable_" + shape.str() + ".txt"));
      q << table.serialize(run.config.learner.alpha, run.config.learner.gamma);
    }
    if (run.config.record_level == RecordLevel::per_tick)
      write_ticks(std::filesystem::path(out_dir) / "ticks.csv", result);
  }
  return 0;
}

int sweep(const std::string& name, const std::string& out_dir, int jobs) {
  Scenario scenario;
  if (is_preset(name)) {
    scenario = preset(name);
  } else if (std::filesystem::exists(name)) {
    scenario = load_config(name);
  } else {
    std::string valid;
    for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw InputError("'" + name + "' is neither a preset (" + valid + ") nor a readable file");
  }
  if (const auto s = env_seed()) scenario.config.seed = *s;
  validate(scenario);
  const auto runs = expand(scenario).size();
  std::fprintf(stderr, "%s: %zu runs on %d threads\n", scenario.name.c_str(), runs, jobs);
  emit_csv(run_sweep(scenario, jobs), out_dir);
  std::printf("wrote %s\n", out_dir.c_str());
  return 0;
}

int report(const std::string& in_dir, const std::string& plot, const std::string& out_dir, bool svg) {
  for (const auto& p : emit_plot_data(in_dir, plot, out_dir.empty() ? in_dir : out_dir, svg))
    std::printf("wrote %s\n", p.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-harvesting wake-up policy simulator"};
  app.require_subcommand(1);

  std::string config_path, policy, out_dir, scenario_name, in_dir, plot;
  std::optional<std::uint64_t> seed;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  bool no_svg = false;

  auto* sim = app.add_subcommand("simulate", "Run one configuration");
  sim->add_option("--config", config_path, "Scenario file")->required();
  sim->add_option("--seed", seed, "Seed (overrides SMARTON_SIM_SEED and the file)");
  sim->add_option("--policy", policy, "smarton, ctid, ctidpro or gt");
  sim->add_option("--out", out_dir, "Directory for CSV output");

  auto* sw = app.add_subcommand("sweep", "Run every configuration of a scenario");
  sw->add_option("--scenario", scenario_name, "Preset name or scenario file")->required();
  sw->add_option("--out", out_dir, "Output directory")->required();
  sw->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1, 256));

  auto* rep = app.add_subcommand("report", "Write .dat/.svg figure data from sweep output");
  rep->add_option("--in", in_dir, "Sweep output directory")->required();
  rep->add_option("--plot", plot, "conv-vs-ratio, conv-per-entry, perf-by-type, state-duration or adaptation")
      ->required();
  rep->add_option("--out", out_dir, "Output directory (default: --in)");
  rep->add_flag("--no-svg", no_svg, "Only write the .dat file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) return simulate(config_path, seed, policy, out_dir);
    if (sw->parsed()) return sweep(scenario_name, out_dir, jobs);
    return report(in_dir, plot, out_dir, !no_svg);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const UnknownPlot& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

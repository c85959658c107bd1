#include "smarton/report.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "smarton/studies.hpp"

namespace smarton {

void SweepResult::append(SweepResult&& other) {
  std::move(other.runs.begin(), other.runs.end(), std::back_inserter(runs));
  std::move(other.convergence.begin(), other.convergence.end(), std::back_inserter(convergence));
  std::move(other.gating.begin(), other.gating.end(), std::back_inserter(gating));
}

SweepResult summarize_run(const Scenario& scenario, const RunSpec& run, const ExperimentResult& result) {
  const SimConfig& c = run.config;
  SweepResult out;
  RunRecord r;
  r.scenario = scenario.name;
  r.policy = c.policy;
  r.event_type = run.event_type;
  r.entry_level = c.store.entry_level;
  r.seed = c.seed;
  r.charging_ratio = c.store.charging_ratio;
  r.state_duration = c.learner.state_duration;
  r.last_period = static_cast<std::int64_t>(result.periods.size()) - 1;
  r.metrics = result.tail_metrics(c.eval_periods);
  for (const auto& log : result.periods) r.timeline.push_back({log.period, log.phase, log.catches, log.misses()});
  out.runs.push_back(std::move(r));
  if (c.policy == PolicyKind::smarton) {
    const ConvergenceStats stats = convergence_stats(result);
    for (const auto& e : stats.entries) {
      if (!e.converged || e.episodes_to_converge == 0) continue;
      out.convergence.push_back({scenario.name, c.seed, c.store.charging_ratio, e.entry_level, e.learn_order,
                                 e.episodes_to_converge, std::nullopt});
    }
    if (!stats.phase1_passes.empty())
      out.convergence.push_back({scenario.name, c.seed, c.store.charging_ratio, std::nullopt, std::nullopt,
                                 std::nullopt, stats.phase1_passes.front()});
  }
  return out;
}

SweepResult run_one(const Scenario& scenario, const RunSpec& run) {
  const SimConfig& c = run.config;
  SweepResult out;
  switch (scenario.study) {
    case StudyKind::run:
      return summarize_run(scenario, run, run_experiment(c));
    case StudyKind::conv_ratio:
      if (const auto passes = phase1_passes(c))
        out.convergence.push_back(
            {scenario.name, c.seed, c.store.charging_ratio, std::nullopt, std::nullopt, std::nullopt, *passes});
      break;
    case StudyKind::conv_entry: {
      const OrderStudy study = run_order_study(c, scenario.max_episodes);
      for (std::size_t i = 0; i < study.order.size(); ++i)
        out.convergence.push_back({scenario.name, c.seed, c.store.charging_ratio, study.order[i],
                                   static_cast<int>(i + 1), study.episodes[i], std::nullopt});
      break;
    }
    case StudyKind::gating: {
      const GatingStudy study = run_gating_study(c, scenario.max_episodes);
      out.gating.push_back({scenario.name, c.seed, study.first_exploitable, study.full_table, study.complete});
      break;
    }
  }
  return out;
}

SweepResult run_sweep(const Scenario& scenario, int jobs) {
  const std::vector<RunSpec> runs = expand(scenario);
  std::vector<SweepResult> parts(runs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        parts[i] = run_one(scenario, runs[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = runs.size();
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::clamp(jobs, 1, 256));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(n, runs.size()); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  SweepResult merged;
  for (auto& p : parts) merged.append(std::move(p));
  return merged;
}

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

template <typename T>
std::string opt(const std::optional<T>& v) {
  return v ? std::to_string(*v) : std::string();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (out) out << content;
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "': " + std::strerror(errno));
}

const char* kMetricsHeader =
    "scenario,policy,event_type,entry_level,seed,period,total_catches,energy_efficiency,awake_ticks,event_ticks,"
    "charging_ratio,state_duration\n";
const char* kConvergenceHeader = "scenario,seed,charging_ratio,entry_level,learn_order,episodes_to_converge,passes\n";
const char* kTimelineHeader = "scenario,policy,seed,period,phase,catches,misses\n";
const char* kGatingHeader = "scenario,seed,first_exploitable,full_table,complete\n";

}  // namespace

void emit_csv(const SweepResult& result, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + out_dir.string() + "': " + ec.message());

  std::ostringstream metrics, convergence, timeline;
  metrics << kMetricsHeader;
  convergence << kConvergenceHeader;
  timeline << kTimelineHeader;
  for (const auto& r : result.runs) {
    const Metrics& m = r.metrics;
    metrics << r.scenario << ',' << to_string(r.policy) << ',' << r.event_type << ',' << opt(r.entry_level) << ','
            << r.seed << ',' << r.last_period << ',' << m.total_catches << ',' << fixed6(m.energy_efficiency) << ','
            << m.awake_ticks << ',' << m.event_ticks << ',' << fixed6(r.charging_ratio) << ',' << r.state_duration
            << '\n';
    for (const auto& t : r.timeline)
      timeline << r.scenario << ',' << to_string(r.policy) << ',' << r.seed << ',' << t.period << ',' << t.phase << ','
               << t.catches << ',' << t.misses << '\n';
  }
  for (const auto& c : result.convergence)
    convergence << c.scenario << ',' << c.seed << ',' << fixed6(c.charging_ratio) << ',' << opt(c.entry_level) << ','
                << opt(c.learn_order) << ',' << opt(c.episodes_to_converge) << ',' << opt(c.passes) << '\n';

  write_file(out_dir / "metrics.csv", metrics.str());
  write_file(out_dir / "convergence.csv", convergence.str());
  write_file(out_dir / "timeline.csv", timeline.str());
  if (!result.gating.empty()) {
    std::ostringstream gating;
    gating << kGatingHeader;
    for (const auto& g : result.gating)
      gating << g.scenario << ',' << g.seed << ',' << g.first_exploitable << ',' << g.full_table << ','
             << (g.complete ? 1 : 0) << '\n';
    write_file(out_dir / "gating.csv", gating.str());
  }
}

std::size_t CsvTable::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::runtime_error("CSV column '" + std::string(name) + "' is missing");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "': " + std::strerror(errno));
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  CsvTable t;
  std::string line;
  if (std::getline(in, line)) t.header = split(line);
  while (std::getline(in, line))
    if (!line.empty()) t.rows.push_back(split(line));
  return t;
}

namespace {

struct Stat {
  double sum = 0.0;
  double sum_sq = 0.0;
  int n = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double stderr_() const {
    if (n < 2) return 0.0;
    const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1));
    return std::sqrt(var / n);
  }
};

struct Series {
  std::string name;
  std::vector<double> y;
  std::vector<double> err;
};

std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Frame {
  double width = 640, height = 400, left = 70, right = 20, top = 40, bottom = 60;
  double y_max = 1.0;

  double px(double fraction) const { return left + fraction * (width - left - right); }
  double py(double y) const { return height - bottom - (y / y_max) * (height - top - bottom); }
};

std::string svg_open(const Frame& f, const std::string& title, const std::string& xlabel, const std::string& ylabel) {
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << f.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << svg_escape(title)
    << "</text>\n"
    << "<line x1=\"" << f.left << "\" y1=\"" << f.py(0) << "\" x2=\"" << f.width - f.right << "\" y2=\"" << f.py(0)
    << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << f.left << "\" y1=\"" << f.top << "\" x2=\"" << f.left << "\" y2=\"" << f.py(0)
    << "\" stroke=\"black\"/>\n"
    << "<text x=\"" << f.width / 2 << "\" y=\"" << f.height - 10 << "\" text-anchor=\"middle\">" << svg_escape(xlabel)
    << "</text>\n"
    << "<text x=\"15\" y=\"" << f.height / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
    << f.height / 2 << ")\">" << svg_escape(ylabel) << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = f.y_max * i / 4.0;
    o << "<text x=\"" << f.left - 6 << "\" y=\"" << f.py(v) + 4 << "\" text-anchor=\"end\">" << v << "</text>\n";
  }
  return o.str();
}

double nice_max(double v) {
  if (v <= 0.0) return 1.0;
  const double mag = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
    if (v <= m * mag) return m * mag;
  return 10.0 * mag;
}

std::string legend(const Frame& f, const std::vector<Series>& series) {
  std::ostringstream o;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = f.top + 14.0 * static_cast<double>(i);
    o << "<rect x=\"" << f.width - f.right - 110 << "\" y=\"" << y - 9 << "\" width=\"10\" height=\"10\" fill=\""
      << kPalette[i % 6] << "\"/><text x=\"" << f.width - f.right - 95 << "\" y=\"" << y << "\">"
      << svg_escape(series[i].name) << "</text>\n";
  }
  return o.str();
}

std::string line_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       const std::vector<double>& x, const std::vector<Series>& series) {
  Frame f;
  double y_max = 0.0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.y.size(); ++i) y_max = std::max(y_max, s.y[i] + (s.err.empty() ? 0.0 : s.err[i]));
  f.y_max = nice_max(y_max);
  const double x_lo = x.empty() ? 0.0 : *std::min_element(x.begin(), x.end());
  const double x_hi = x.empty() ? 1.0 : *std::max_element(x.begin(), x.end());
  auto fx = [&](double v) { return f.px(x_hi > x_lo ? (v - x_lo) / (x_hi - x_lo) : 0.5); };

  std::ostringstream o;
  o << svg_open(f, title, xlabel, ylabel);
  for (std::size_t i = 0; i < x.size(); i += std::max<std::size_t>(1, x.size() / 10))
    o << "<text x=\"" << fx(x[i]) << "\" y=\"" << f.py(0) + 16 << "\" text-anchor=\"middle\">" << x[i] << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % 6];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i) o << fx(x[i]) << ',' << f.py(series[s].y[i]) << ' ';
    o << "\"/>\n";
    if (x.size() <= 50) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        o << "<circle cx=\"" << fx(x[i]) << "\" cy=\"" << f.py(series[s].y[i]) << "\" r=\"3\" fill=\"" << color
          << "\"/>\n";
        if (!series[s].err.empty() && series[s].err[i] > 0.0)
          o << "<line x1=\"" << fx(x[i]) << "\" y1=\"" << f.py(series[s].y[i] - series[s].err[i]) << "\" x2=\""
            << fx(x[i]) << "\" y2=\"" << f.py(series[s].y[i] + series[s].err[i]) << "\" stroke=\"" << color
            << "\"/>\n";
      }
    }
  }
  if (series.size() > 1) o << legend(f, series);
  o << "</svg>\n";
  return o.str();
}

std::string bar_chart(const std::string& title, const std::string& ylabel, const std::vector<std::string>& groups,
                      const std::vector<Series>& series) {
  Frame f;
  f.width = std::max(640.0, 40.0 * static_cast<double>(groups.size() * std::max<std::size_t>(series.size(), 1)) + 120);
  double y_max = 0.0;
  for (const auto& s : series)
    for (double v : s.y) y_max = std::max(y_max, v);
  f.y_max = nice_max(y_max);
  std::ostringstream o;
  o << svg_open(f, title, "", ylabel);
  const double group_w = (f.width - f.left - f.right) / static_cast<double>(std::max<std::size_t>(groups.size(), 1));
  const double bar_w = group_w * 0.8 / static_cast<double>(std::max<std::size_t>(series.size(), 1));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double x0 = f.left + group_w * static_cast<double>(g) + group_w * 0.1;
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double v = series[s].y[g];
      o << "<rect x=\"" << x0 + bar_w * static_cast<double>(s) << "\" y=\"" << f.py(v) << "\" width=\"" << bar_w
        << "\" height=\"" << f.py(0) - f.py(v) << "\" fill=\"" << kPalette[s % 6] << "\"/>\n";
    }
    o << "<text x=\"" << x0 + group_w * 0.4 << "\" y=\"" << f.py(0) + 16 << "\" text-anchor=\"middle\" font-size=\"10\">"
      << svg_escape(groups[g]) << "</text>\n";
  }
  o << legend(f, series) << "</svg>\n";
  return o.str();
}

double to_double(const std::string& s) { return s.empty() ? 0.0 : std::stod(s); }

PlotData conv_vs_ratio(const std::filesystem::path& dir) {
  const CsvTable t = read_csv(dir / "convergence.csv");
  const auto ratio = t.column("charging_ratio"), passes = t.column("passes");
  std::map<double, Stat> by_ratio;
  for (const auto& r : t.rows)
    if (!r[passes].empty()) by_ratio[to_double(r[ratio])].add(to_double(r[passes]));
  if (by_ratio.empty()) throw std::runtime_error("convergence.csv has no Phase-1 rows");
  PlotData p{"conv-vs-ratio", {"ratio", "mean_passes", "stderr"}, {}, {}};
  std::vector<double> x;
  Series s{"passes", {}, {}};
  for (const auto& [k, st] : by_ratio) {
    p.rows.push_back({fixed6(k), fixed6(st.mean()), fixed6(st.stderr_())});
    x.push_back(k);
    s.y.push_back(st.mean());
    s.err.push_back(st.stderr_());
  }
  p.svg = line_chart("Phase-1 passes to converge", "charging ratio", "passes", x, {s});
  return p;
}

PlotData conv_per_entry(const std::filesystem::path& dir) {
  const CsvTable t = read_csv(dir / "convergence.csv");
  const auto order = t.column("learn_order"), episodes = t.column("episodes_to_converge");
  std::map<int, Stat> by_order;
  for (const auto& r : t.rows)
    if (!r[order].empty() && !r[episodes].empty()) by_order[std::stoi(r[order])].add(to_double(r[episodes]));
  if (by_order.empty()) throw std::runtime_error("convergence.csv has no entry-level rows");
  PlotData p{"conv-per-entry", {"learn_order", "mean_episodes", "stderr"}, {}, {}};
  std::vector<double> x;
  Series s{"episodes", {}, {}};
  for (const auto& [k, st] : by_order) {
    p.rows.push_back({std::to_string(k), fixed6(st.mean()), fixed6(st.stderr_())});
    x.push_back(k);
    s.y.push_back(st.mean());
    s.err.push_back(st.stderr_());
  }
  p.svg = line_chart("Episodes to converge by learning position", "learning position", "episodes", x, {s});
  return p;
}

PlotData perf_by_type(const std::filesystem::path& dir) {
  const CsvTable t = read_csv(dir / "metrics.csv");
  const auto type = t.column("event_type"), level = t.column("entry_level"), policy = t.column("policy");
  const auto catches = t.column("total_catches"), eff = t.column("energy_efficiency");
  const std::vector<std::string> policies{"smarton", "ctid", "ctidpro", "gt"};
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::pair<Stat, Stat>>> cells;
  for (const auto& r : t.rows) {
    auto& c = cells[{r[type], r[level]}][r[policy]];
    c.first.add(to_double(r[catches]));
    c.second.add(to_double(r[eff]));
  }
  if (cells.empty()) throw std::runtime_error("metrics.csv has no rows");
  PlotData p{"perf-by-type", {"event_type", "entry_level"}, {}, {}};
  for (const auto& pol : policies) {
    p.columns.push_back(pol + "_catches");
    p.columns.push_back(pol + "_efficiency");
  }
  std::vector<std::string> groups;
  std::vector<Series> series;
  for (const auto& pol : policies) series.push_back({pol, {}, {}});
  for (const auto& [key, by_policy] : cells) {
    std::vector<std::string> row{key.first, key.second.empty() ? "none" : key.second};
    for (std::size_t i = 0; i < policies.size(); ++i) {
      const auto it = by_policy.find(policies[i]);
      const double c = it == by_policy.end() ? 0.0 : it->second.first.mean();
      const double e = it == by_policy.end() ? 0.0 : it->second.second.mean();
      row.push_back(fixed6(c));
      row.push_back(fixed6(e));
      series[i].y.push_back(c);
    }
    groups.push_back(key.first + "/E" + (key.second.empty() ? "-" : key.second));
    p.rows.push_back(std::move(row));
  }
  p.svg = bar_chart("Total catches by event type and entry level", "total catches", groups, series);
  return p;
}

PlotData state_duration(const std::filesystem::path& dir) {
  const CsvTable t = read_csv(dir / "metrics.csv");
  const auto sd = t.column("state_duration"), catches = t.column("total_catches");
  std::map<int, Stat> by_sd;
  for (const auto& r : t.rows) by_sd[std::stoi(r[sd])].add(to_double(r[catches]));
  if (by_sd.empty()) throw std::runtime_error("metrics.csv has no rows");
  PlotData p{"state-duration", {"state_duration", "mean_catches", "stderr"}, {}, {}};
  std::vector<double> x;
  Series s{"catches", {}, {}};
  for (const auto& [k, st] : by_sd) {
    p.rows.push_back({std::to_string(k), fixed6(st.mean()), fixed6(st.stderr_())});
    x.push_back(k);
    s.y.push_back(st.mean());
    s.err.push_back(st.stderr_());
  }
  p.svg = line_chart("Total catches by state duration", "state duration (s)", "total catches", x, {s});
  return p;
}

PlotData adaptation(const std::filesystem::path& dir) {
  const CsvTable t = read_csv(dir / "timeline.csv");
  if (t.rows.empty()) throw std::runtime_error("timeline.csv has no rows");
  const auto scen = t.column("scenario"), pol = t.column("policy"), seed = t.column("seed");
  const auto period = t.column("period"), phase = t.column("phase"), catches = t.column("catches"),
             misses = t.column("misses");
  const auto& first = t.rows.front();
  PlotData p{"adaptation", {"period", "phase", "catches", "misses"}, {}, {}};
  std::vector<double> x;
  Series c{"catches", {}, {}}, m{"misses", {}, {}}, ph{"phase x10", {}, {}};
  for (const auto& r : t.rows) {
    if (r[scen] != first[scen] || r[pol] != first[pol] || r[seed] != first[seed]) continue;
    p.rows.push_back({r[period], r[phase], r[catches], r[misses]});
    x.push_back(to_double(r[period]));
    c.y.push_back(to_double(r[catches]));
    m.y.push_back(to_double(r[misses]));
    ph.y.push_back(10.0 * to_double(r[phase]));
  }
  p.svg = line_chart("Catches, misses and phase per period", "period", "events", x, {c, m, ph});
  return p;
}

}  // namespace

std::vector<std::string> plot_ids() {
  return {"conv-vs-ratio", "conv-per-entry", "perf-by-type", "state-duration", "adaptation"};
}

PlotData make_plot(const std::filesystem::path& in_dir, std::string_view id) {
  if (id == "conv-vs-ratio") return conv_vs_ratio(in_dir);
  if (id == "conv-per-entry") return conv_per_entry(in_dir);
  if (id == "perf-by-type") return perf_by_type(in_dir);
  if (id == "state-duration") return state_duration(in_dir);
  if (id == "adaptation") return adaptation(in_dir);
  std::string valid;
  for (const auto& v : plot_ids()) valid += (valid.empty() ? "" : ", ") + v;
  throw UnknownPlot("unknown plot '" + std::string(id) + "' (valid: " + valid + ")");
}

std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& in_dir, std::string_view id,
                                                  const std::filesystem::path& out_dir, bool svg) {
  const PlotData p = make_plot(in_dir, id);
  std::ostringstream dat;
  dat << '#';
  for (const auto& c : p.columns) dat << ' ' << c;
  dat << '\n';
  for (const auto& row : p.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) dat << (i ? " " : "") << row[i];
    dat << '\n';
  }
  std::vector<std::filesystem::path> written{out_dir / (p.id + ".dat")};
  write_file(written.back(), dat.str());
  if (svg) {
    written.push_back(out_dir / (p.id + ".svg"));
    write_file(written.back(), p.svg);
  }
  return written;
}

}  // namespace smarton

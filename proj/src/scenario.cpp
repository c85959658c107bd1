#include "smarton/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "smarton/studies.hpp"

namespace smarton {

std::string to_string(StudyKind kind) {
  switch (kind) {
    case StudyKind::run: return "run";
    case StudyKind::conv_ratio: return "conv-ratio";
    case StudyKind::conv_entry: return "conv-entry";
    case StudyKind::gating: return "gating";
  }
  return "?";
}

StudyKind parse_study(std::string_view text) {
  if (text == "run") return StudyKind::run;
  if (text == "conv-ratio") return StudyKind::conv_ratio;
  if (text == "conv-entry") return StudyKind::conv_entry;
  if (text == "gating") return StudyKind::gating;
  throw std::invalid_argument("unknown study '" + std::string(text) + "' (valid: run, conv-ratio, conv-entry, gating)");
}

SimConfig Scenario::default_config() {
  SimConfig c;
  c.pattern.peaks = {make_peak("type1", 10)};
  return c;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    std::string item = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("'" + text + "' is not a valid number");
  return value;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw std::invalid_argument("'" + text + "' is not a boolean");
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<PeakSpec> parse_peaks(const std::string& text) {
  std::vector<PeakSpec> peaks;
  for (const auto& item : split(text, ',')) {
    const auto at = item.find('@');
    if (at == std::string::npos) throw std::invalid_argument("peak '" + item + "' must look like <shape>@<slot>");
    peaks.push_back(make_peak(trim(item.substr(0, at)), parse_number<int>(trim(item.substr(at + 1)))));
  }
  return peaks;
}

std::string format_peaks(const std::vector<PeakSpec>& peaks) {
  std::string out;
  for (const auto& p : peaks) {
    if (!out.empty()) out += ", ";
    out += (p.shape_name == "custom" ? to_string(p.steps) : p.shape_name) + "@" + std::to_string(p.start_slot);
  }
  return out;
}

std::optional<int> parse_entry_level(const std::string& text) {
  if (text == "none") return std::nullopt;
  std::string digits = text;
  if (!digits.empty() && (digits[0] == 'E' || digits[0] == 'e')) digits.erase(0, 1);
  return parse_number<int>(digits);
}

std::vector<ScheduleEntry> parse_schedule(const std::string& text) {
  std::vector<ScheduleEntry> out;
  for (const auto& item : split(text, ';')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("schedule entry '" + item + "' needs <period>:<peaks>");
    ScheduleEntry e;
    e.start_period = parse_number<std::int64_t>(trim(item.substr(0, colon)));
    std::string rest = item.substr(colon + 1);
    if (const auto slash = rest.find('/'); slash != std::string::npos) {
      e.entry_level = parse_entry_level(trim(rest.substr(slash + 1)));
      rest = rest.substr(0, slash);
    }
    e.peaks = parse_peaks(rest);
    out.push_back(std::move(e));
  }
  return out;
}

std::string format_schedule(const std::vector<ScheduleEntry>& schedule) {
  std::string out;
  for (const auto& e : schedule) {
    if (!out.empty()) out += "; ";
    out += std::to_string(e.start_period) + ":" + format_peaks(e.peaks);
    if (e.entry_level) out += "/E" + std::to_string(*e.entry_level);
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split(text, ',')) {
    if (const auto dash = item.find('-'); dash != std::string::npos && dash > 0) {
      const auto lo = parse_number<std::uint64_t>(trim(item.substr(0, dash)));
      const auto hi = parse_number<std::uint64_t>(trim(item.substr(dash + 1)));
      if (hi < lo) throw std::invalid_argument("seed range '" + item + "' is empty");
      for (auto s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(parse_number<std::uint64_t>(item));
    }
  }
  return out;
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& text, F parse_one) {
  std::vector<T> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_one(item));
  return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& values, F format_one) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ", ";
    out += format_one(v);
  }
  return out;
}

std::string record_level_name(RecordLevel level) { return level == RecordLevel::per_tick ? "per-tick" : "summary"; }

using Setter = std::function<void(Scenario&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> m;
    auto num_d = [](auto member) { return [member](Scenario& s, const std::string& v) { member(s) = parse_number<double>(v); }; };
    auto num_i = [](auto member) { return [member](Scenario& s, const std::string& v) { member(s) = parse_number<int>(v); }; };

    m["name"] = [](Scenario& s, const std::string& v) {
      if (v.empty() || v.find_first_of(",\"") != std::string::npos) throw std::invalid_argument("names may not be empty or contain ',' or '\"'");
      s.name = v;
    };
    m["seed"] = [](Scenario& s, const std::string& v) { s.config.seed = parse_number<std::uint64_t>(v); };
    m["n_periods"] = [](Scenario& s, const std::string& v) { s.config.n_periods = parse_number<std::int64_t>(v); };
    m["record_level"] = [](Scenario& s, const std::string& v) {
      if (v == "summary") s.config.record_level = RecordLevel::summary;
      else if (v == "per-tick") s.config.record_level = RecordLevel::per_tick;
      else throw std::invalid_argument("record_level must be summary or per-tick");
    };
    m["stop_after_stable"] = num_i([](Scenario& s) -> int& { return s.config.stop_after_stable; });
    m["eval_periods"] = num_i([](Scenario& s) -> int& { return s.config.eval_periods; });

    m["pattern.period"] = num_i([](Scenario& s) -> int& { return s.config.pattern.period_ticks; });
    m["pattern.state_duration"] = num_i([](Scenario& s) -> int& { return s.config.pattern.state_duration; });
    m["pattern.peak_max_duration"] = [](Scenario& s, const std::string& v) {
      s.config.pattern.peak_max_duration = parse_number<int>(v);
      s.config.learner.peak_max_duration = s.config.pattern.peak_max_duration;
    };
    m["pattern.p_high"] = num_d([](Scenario& s) -> double& { return s.config.pattern.p_high; });
    m["pattern.p_low"] = num_d([](Scenario& s) -> double& { return s.config.pattern.p_low; });
    m["pattern.background_rate"] = num_d([](Scenario& s) -> double& { return s.config.pattern.background_rate; });
    m["pattern.peaks"] = [](Scenario& s, const std::string& v) { s.config.pattern.peaks = parse_peaks(v); };
    m["pattern.schedule"] = [](Scenario& s, const std::string& v) { s.config.schedule = parse_schedule(v); };

    m["energy.store"] = [](Scenario& s, const std::string& v) {
      if (v == "abstract") s.config.store.kind = StoreKind::abstract;
      else if (v == "array") s.config.store.kind = StoreKind::array;
      else throw std::invalid_argument("store must be abstract or array");
    };
    m["energy.capacity"] = num_d([](Scenario& s) -> double& { return s.config.store.capacity; });
    m["energy.charging_ratio"] = num_d([](Scenario& s) -> double& { return s.config.store.charging_ratio; });
    m["energy.wake_cost"] = num_d([](Scenario& s) -> double& { return s.config.store.wake_cost; });
    m["energy.initial"] = num_d([](Scenario& s) -> double& { return s.config.store.initial; });
    m["energy.array_preset"] = [](Scenario& s, const std::string& v) { s.config.store.array_preset = v; };
    m["energy.capacitances"] = [](Scenario& s, const std::string& v) {
      s.config.store.capacitances = parse_list<double>(v, [](const std::string& x) { return parse_number<double>(x); });
    };
    m["energy.v_activate"] = num_d([](Scenario& s) -> double& { return s.config.store.v_activate; });
    m["energy.v_max"] = num_d([](Scenario& s) -> double& { return s.config.store.v_max; });
    m["energy.initial_voltage"] = num_d([](Scenario& s) -> double& { return s.config.store.initial_voltage; });
    m["energy.entry_level"] = [](Scenario& s, const std::string& v) { s.config.store.entry_level = parse_entry_level(v); };
    m["energy.source"] = [](Scenario& s, const std::string& v) { s.config.source.kind = v; };
    m["energy.intensity"] = num_d([](Scenario& s) -> double& { return s.config.source.intensity; });
    m["energy.day_ticks"] = [](Scenario& s, const std::string& v) { s.config.source.day_ticks = parse_number<std::int64_t>(v); };
    m["energy.daylight_ticks"] = [](Scenario& s, const std::string& v) {
      s.config.source.daylight_ticks = parse_number<std::int64_t>(v);
    };
    m["energy.offset"] = [](Scenario& s, const std::string& v) { s.config.source.offset = parse_number<std::int64_t>(v); };
    m["energy.trace"] = [](Scenario& s, const std::string& v) { s.config.source.path = v; };

    m["learner.alpha"] = num_d([](Scenario& s) -> double& { return s.config.learner.alpha; });
    m["learner.gamma"] = num_d([](Scenario& s) -> double& { return s.config.learner.gamma; });
    m["learner.reward_catch"] = num_d([](Scenario& s) -> double& { return s.config.learner.reward_catch; });
    m["learner.reward_miss"] = num_d([](Scenario& s) -> double& { return s.config.learner.reward_miss; });
    m["learner.levels"] = num_i([](Scenario& s) -> int& { return s.config.learner.levels; });
    m["learner.state_duration"] = num_i([](Scenario& s) -> int& { return s.config.learner.state_duration; });
    m["learner.frequencies"] = [](Scenario& s, const std::string& v) {
      s.config.learner.actions.frequencies =
          parse_list<double>(v, [](const std::string& x) { return parse_number<double>(x); });
    };
    m["learner.convergence_epsilon"] = num_d([](Scenario& s) -> double& { return s.config.learner.convergence_epsilon; });
    m["learner.convergence_rel_tol"] = num_d([](Scenario& s) -> double& { return s.config.learner.convergence_rel_tol; });
    m["learner.convergence_window"] = num_i([](Scenario& s) -> int& { return s.config.learner.convergence_window; });
    m["learner.profile_window"] = num_i([](Scenario& s) -> int& { return s.config.learner.profile_window; });
    m["learner.profile_rel_tol"] = num_d([](Scenario& s) -> double& { return s.config.learner.profile_rel_tol; });
    m["learner.profile_abs_tol"] = num_d([](Scenario& s) -> double& { return s.config.learner.profile_abs_tol; });
    m["learner.shape_threshold"] = num_d([](Scenario& s) -> double& { return s.config.learner.shape_threshold; });
    m["learner.noise_floor"] = num_d([](Scenario& s) -> double& { return s.config.learner.noise_floor; });
    m["learner.probe_budget"] = num_i([](Scenario& s) -> int& { return s.config.learner.probe_budget; });
    m["learner.probe_trigger"] = num_i([](Scenario& s) -> int& { return s.config.learner.probe_trigger; });
    m["learner.hold_learning"] = [](Scenario& s, const std::string& v) { s.config.learner.hold_learning = parse_bool(v); };

    m["policy.name"] = [](Scenario& s, const std::string& v) { s.config.policy = parse_policy(v); };
    m["policy.ctid_on"] = num_d([](Scenario& s) -> double& { return s.config.ctid.e_on; });
    m["policy.ctid_off"] = num_d([](Scenario& s) -> double& { return s.config.ctid.e_off; });
    m["policy.ctid_frequency"] = num_d([](Scenario& s) -> double& { return s.config.ctid.discharge_frequency; });
    m["policy.warm_start"] = [](Scenario& s, const std::string& v) { s.warm_start = split(v, ','); };

    m["sweep.study"] = [](Scenario& s, const std::string& v) { s.study = parse_study(v); };
    m["sweep.max_episodes"] = num_i([](Scenario& s) -> int& { return s.max_episodes; });
    m["sweep.charging_ratio"] = [](Scenario& s, const std::string& v) {
      s.sweep.charging_ratio = parse_list<double>(v, [](const std::string& x) { return parse_number<double>(x); });
    };
    m["sweep.entry_level"] = [](Scenario& s, const std::string& v) {
      s.sweep.entry_level = parse_list<int>(v, [](const std::string& x) { return parse_entry_level(x).value_or(0); });
    };
    m["sweep.event_type"] = [](Scenario& s, const std::string& v) { s.sweep.event_type = split(v, ','); };
    m["sweep.state_duration"] = [](Scenario& s, const std::string& v) {
      s.sweep.state_duration = parse_list<int>(v, [](const std::string& x) { return parse_number<int>(x); });
    };
    m["sweep.policy"] = [](Scenario& s, const std::string& v) {
      s.sweep.policy = parse_list<PolicyKind>(v, [](const std::string& x) { return parse_policy(x); });
    };
    m["sweep.seed"] = [](Scenario& s, const std::string& v) { s.sweep.seed = parse_seeds(v); };
    return m;
  }();
  return table;
}

const std::vector<std::string> kSections{"pattern", "energy", "learner", "policy", "sweep"};

}  // namespace

Scenario parse_config(std::string_view text) {
  Scenario s;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (std::find(kSections.begin(), kSections.end(), section) == kSections.end())
        throw ParseError(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string full = section.empty() ? key : section + "." + key;
    const auto it = setters().find(full);
    if (it == setters().end()) throw ParseError(line_no, "unknown key '" + full + "'");
    try {
      it->second(s, value);
    } catch (const std::exception& e) {
      throw ParseError(line_no, full + ": " + e.what());
    }
  }
  validate(s);
  return s;
}

Scenario load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string write_config(const Scenario& s) {
  const SimConfig& c = s.config;
  const auto d = format_double;
  const auto i = [](auto v) { return std::to_string(v); };
  std::ostringstream o;
  o << "name = " << s.name << "\n"
    << "seed = " << c.seed << "\n"
    << "n_periods = " << c.n_periods << "\n"
    << "record_level = " << record_level_name(c.record_level) << "\n"
    << "stop_after_stable = " << c.stop_after_stable << "\n"
    << "eval_periods = " << c.eval_periods << "\n\n";
  o << "[pattern]\n"
    << "period = " << c.pattern.period_ticks << "\n"
    << "state_duration = " << c.pattern.state_duration << "\n"
    << "peak_max_duration = " << c.pattern.peak_max_duration << "\n"
    << "p_high = " << d(c.pattern.p_high) << "\n"
    << "p_low = " << d(c.pattern.p_low) << "\n"
    << "background_rate = " << d(c.pattern.background_rate) << "\n"
    << "peaks = " << format_peaks(c.pattern.peaks) << "\n"
    << "schedule = " << format_schedule(c.schedule) << "\n\n";
  o << "[energy]\n"
    << "store = " << (c.store.kind == StoreKind::array ? "array" : "abstract") << "\n"
    << "capacity = " << d(c.store.capacity) << "\n"
    << "charging_ratio = " << d(c.store.charging_ratio) << "\n"
    << "wake_cost = " << d(c.store.wake_cost) << "\n"
    << "initial = " << d(c.store.initial) << "\n"
    << "array_preset = " << c.store.array_preset << "\n"
    << "capacitances = " << join(c.store.capacitances, d) << "\n"
    << "v_activate = " << d(c.store.v_activate) << "\n"
    << "v_max = " << d(c.store.v_max) << "\n"
    << "initial_voltage = " << d(c.store.initial_voltage) << "\n"
    << "entry_level = " << (c.store.entry_level ? i(*c.store.entry_level) : "none") << "\n"
    << "source = " << c.source.kind << "\n"
    << "intensity = " << d(c.source.intensity) << "\n"
    << "day_ticks = " << c.source.day_ticks << "\n"
    << "daylight_ticks = " << c.source.daylight_ticks << "\n"
    << "offset = " << c.source.offset << "\n"
    << "trace = " << c.source.path << "\n\n";
  const LearnerConfig& l = c.learner;
  o << "[learner]\n"
    << "alpha = " << d(l.alpha) << "\n"
    << "gamma = " << d(l.gamma) << "\n"
    << "reward_catch = " << d(l.reward_catch) << "\n"
    << "reward_miss = " << d(l.reward_miss) << "\n"
    << "levels = " << l.levels << "\n"
    << "state_duration = " << l.state_duration << "\n"
    << "frequencies = " << join(l.actions.frequencies, d) << "\n"
    << "convergence_epsilon = " << d(l.convergence_epsilon) << "\n"
    << "convergence_rel_tol = " << d(l.convergence_rel_tol) << "\n"
    << "convergence_window = " << l.convergence_window << "\n"
    << "profile_window = " << l.profile_window << "\n"
    << "profile_rel_tol = " << d(l.profile_rel_tol) << "\n"
    << "profile_abs_tol = " << d(l.profile_abs_tol) << "\n"
    << "shape_threshold = " << d(l.shape_threshold) << "\n"
    << "noise_floor = " << d(l.noise_floor) << "\n"
    << "probe_budget = " << l.probe_budget << "\n"
    << "probe_trigger = " << l.probe_trigger << "\n"
    << "hold_learning = " << (l.hold_learning ? "true" : "false") << "\n\n";
  o << "[policy]\n"
    << "name = " << to_string(c.policy) << "\n"
    << "ctid_on = " << d(c.ctid.e_on) << "\n"
    << "ctid_off = " << d(c.ctid.e_off) << "\n"
    << "ctid_frequency = " << d(c.ctid.discharge_frequency) << "\n"
    << "warm_start = " << join(s.warm_start, [](const std::string& p) { return p; }) << "\n\n";
  o << "[sweep]\n"
    << "study = " << to_string(s.study) << "\n"
    << "max_episodes = " << s.max_episodes << "\n"
    << "charging_ratio = " << join(s.sweep.charging_ratio, d) << "\n"
    << "entry_level = "
    << join(s.sweep.entry_level, [](int e) { return e == 0 ? std::string("none") : std::to_string(e); }) << "\n"
    << "event_type = " << join(s.sweep.event_type, [](const std::string& t) { return t; }) << "\n"
    << "state_duration = " << join(s.sweep.state_duration, i) << "\n"
    << "policy = " << join(s.sweep.policy, [](PolicyKind p) { return to_string(p); }) << "\n"
    << "seed = " << join(s.sweep.seed, i) << "\n";
  return o.str();
}

namespace {

std::vector<SimConfig> expand_configs(const Scenario& s, std::vector<std::string>* labels) {
  const auto& a = s.sweep;
  const SimConfig& base = s.config;
  auto or_base = [](const auto& axis, auto value) {
    using T = std::decay_t<decltype(value)>;
    return axis.empty() ? std::vector<T>{value} : std::vector<T>(axis.begin(), axis.end());
  };
  const auto types = or_base(a.event_type, std::string());
  const auto levels = or_base(a.entry_level, base.store.entry_level.value_or(0));
  const auto ratios = or_base(a.charging_ratio, base.store.charging_ratio);
  const auto durations = or_base(a.state_duration, base.learner.state_duration);
  const auto policies = or_base(a.policy, base.policy);
  const auto seeds = or_base(a.seed, base.seed);

  std::vector<SimConfig> out;
  for (const auto& type : types)
    for (int level : levels)
      for (double ratio : ratios)
        for (int duration : durations)
          for (PolicyKind policy : policies)
            for (std::uint64_t seed : seeds) {
              SimConfig c = base;
              if (!type.empty()) {
                const int start = c.pattern.peaks.empty() ? 10 : c.pattern.peaks.front().start_slot;
                c.pattern.peaks = {make_peak(type, start)};
              }
              c.store.entry_level = level == 0 ? std::nullopt : std::optional<int>(level);
              c.store.charging_ratio = ratio;
              c.learner.state_duration = duration;
              c.policy = policy;
              c.seed = seed;
              out.push_back(std::move(c));
              if (labels) labels->push_back(event_type_label(out.back()));
            }
  return out;
}

}  // namespace

void validate(const Scenario& s) {
  if (s.max_episodes < 1) throw ValidationError("sweep.max_episodes", "must be >= 1");
  for (const auto& t : s.sweep.event_type) {
    try {
      make_peak(t, 0);
    } catch (const InvalidSpec& e) {
      throw ValidationError("sweep.event_type", e.what());
    }
  }
  for (int e : s.sweep.entry_level)
    if (e < 0) throw ValidationError("sweep.entry_level", "levels are 1..K or none");
  if (s.study != StudyKind::run && s.study != StudyKind::conv_ratio && s.config.pattern.peaks.empty())
    throw ValidationError("pattern.peaks", "the learning studies need at least one peak");
  smarton::validate(s.config);
  for (const auto& c : expand_configs(s, nullptr)) smarton::validate(c);
}

std::string event_type_label(const SimConfig& config) {
  auto names = [](const std::vector<PeakSpec>& peaks) {
    std::string out;
    for (const auto& p : peaks) {
      if (!out.empty()) out += '+';
      out += p.shape_name == "custom" ? to_string(p.steps) : p.shape_name;
    }
    return out.empty() ? std::string("none") : out;
  };
  std::string label = names(config.pattern.peaks);
  for (const auto& e : config.schedule) label += ">" + names(e.peaks);
  return label;
}

std::vector<RunSpec> expand(const Scenario& s) {
  std::vector<QTable> tables;
  for (const auto& path : s.warm_start) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open warm-start table '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    tables.push_back(QTable::parse(text.str()));
  }
  std::vector<std::string> labels;
  auto configs = expand_configs(s, &labels);
  std::vector<RunSpec> out;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    RunSpec r{i, std::move(configs[i]), labels[i]};
    r.config.warm_start.insert(r.config.warm_start.end(), tables.begin(), tables.end());
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::string> preset_names() {
  return {"fig-perf", "fig-conv-ratio", "fig-conv-entry", "fig-gating", "fig-state-duration", "fig-adaptation"};
}

bool is_preset(std::string_view name) {
  const auto names = preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

Scenario preset(std::string_view name) {
  Scenario s;
  s.name = std::string(name);
  auto seeds = [](std::uint64_t n) {
    std::vector<std::uint64_t> v;
    for (std::uint64_t i = 1; i <= n; ++i) v.push_back(i);
    return v;
  };
  if (name == "fig-perf") {
    s.config.store.charging_ratio = 6.0;
    s.config.n_periods = 1000;
    s.config.stop_after_stable = 14;
    s.config.eval_periods = 14;
    s.sweep.event_type = {"type1", "type2", "type3", "type4"};
    s.sweep.entry_level = {1, 2, 3, 4};
    s.sweep.policy = {PolicyKind::smarton, PolicyKind::ctid, PolicyKind::ctidpro, PolicyKind::gt};
    s.sweep.seed = seeds(10);
  } else if (name == "fig-conv-ratio") {
    s.study = StudyKind::conv_ratio;
    s.config.n_periods = 2000;
    s.sweep.charging_ratio = {3.0, 6.0, 9.0, 12.0};
    s.sweep.seed = seeds(10);
  } else if (name == "fig-conv-entry" || name == "fig-gating") {
    s.study = name == "fig-gating" ? StudyKind::gating : StudyKind::conv_entry;
    s.config = learning_study_config(10, 1);
    s.max_episodes = name == "fig-gating" ? 10000 : 1000;
    s.sweep.seed = seeds(name == "fig-gating" ? 10 : 20);
  } else if (name == "fig-state-duration") {
    s.config.n_periods = 1000;
    s.config.stop_after_stable = 14;
    s.config.eval_periods = 14;
    s.sweep.state_duration = {20, 30, 60};
    s.sweep.seed = seeds(20);
  } else if (name == "fig-adaptation") {
    s.config = adaptation_config(1);
  } else {
    std::string valid;
    for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown preset '" + std::string(name) + "' (valid: " + valid + ")");
  }
  return s;
}

}  // namespace smarton

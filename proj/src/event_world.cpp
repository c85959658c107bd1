#include "smarton/event_world.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "smarton/rng.hpp"

namespace smarton {

std::string to_string(const Signature& steps) {
  std::string s;
  s.reserve(steps.size());
  for (auto c : steps) s.push_back(static_cast<char>(c));
  return s;
}

Signature parse_signature(std::string_view text) {
  Signature out;
  for (char c : text) {
    if (c == 'H' || c == 'h') {
      out.push_back(ProbClass::high);
    } else if (c == 'L' || c == 'l') {
      out.push_back(ProbClass::low);
    } else {
      throw InvalidSpec("shape signature '" + std::string(text) + "' may only contain H and L");
    }
  }
  return out;
}

bool is_canonical_shape(std::string_view name) {
  return name == "type1" || name == "type2" || name == "type3" || name == "type4";
}

PeakSpec make_peak(std::string_view shape, int start_slot) {
  using enum ProbClass;
  PeakSpec p;
  p.start_slot = start_slot;
  p.shape_name = std::string(shape);
  if (shape == "type1") {
    p.steps = {low, high, low};
  } else if (shape == "type2") {
    p.steps = {high, high, high};
  } else if (shape == "type3") {
    p.steps = {high, low, low};
  } else if (shape == "type4") {
    p.steps = {low, low, high};
  } else {
    p.steps = parse_signature(shape);
    p.shape_name = "custom";
  }
  return p;
}

std::string EventPattern::id() const {
  std::string out;
  for (const auto& p : params_.peaks) {
    if (!out.empty()) out += '+';
    out += (p.shape_name == "custom" ? to_string(p.steps) : p.shape_name) + "@" + std::to_string(p.start_slot);
  }
  return out.empty() ? "empty" : out;
}

EventPattern build_pattern(PatternParams params) {
  const auto& pp = params;
  if (pp.period_ticks <= 0 || pp.state_duration <= 0) throw InvalidSpec("period and state duration must be > 0");
  if (pp.period_ticks % pp.state_duration != 0)
    throw InvalidSpec("period (" + std::to_string(pp.period_ticks) + ") is not a multiple of the state duration (" +
                      std::to_string(pp.state_duration) + ")");
  if (pp.peak_max_duration < pp.state_duration) throw InvalidSpec("peak_max_duration shorter than one state");
  if (!(pp.p_low >= 0.0) || !(pp.p_high <= 1.0) || !(pp.p_low <= pp.p_high))
    throw InvalidSpec("event probabilities must satisfy 0 <= p_low <= p_high <= 1");
  if (!(pp.background_rate >= 0.0) || pp.background_rate > 1.0) throw InvalidSpec("background_rate outside [0, 1]");

  const int slots = pp.period_ticks / pp.state_duration;
  const int max_steps = pp.peak_max_duration / pp.state_duration;
  std::vector<int> owner(static_cast<std::size_t>(slots), -1);
  for (std::size_t i = 0; i < pp.peaks.size(); ++i) {
    const auto& peak = pp.peaks[i];
    if (peak.steps.empty()) throw InvalidSpec("zero-length peak");
    if (peak.length() > max_steps)
      throw InvalidSpec("peak " + to_string(peak.steps) + " is longer than " + std::to_string(max_steps) + " steps");
    if (std::none_of(peak.steps.begin(), peak.steps.end(), [](ProbClass c) { return c == ProbClass::high; }))
      throw InvalidSpec("peak " + to_string(peak.steps) + " has no H step");
    if (peak.start_slot < 0 || peak.start_slot + peak.length() > slots)
      throw InvalidSpec("peak at slot " + std::to_string(peak.start_slot) + " does not fit in the period");
    for (int s = peak.start_slot; s < peak.start_slot + peak.length(); ++s) {
      auto& o = owner[static_cast<std::size_t>(s)];
      if (o >= 0) throw InvalidSpec("peaks overlap at slot " + std::to_string(s));
      o = static_cast<int>(i);
    }
  }

  EventPattern pattern;
  pattern.per_tick_.assign(static_cast<std::size_t>(pp.period_ticks), pp.background_rate);
  for (const auto& peak : pp.peaks) {
    for (int k = 0; k < peak.length(); ++k) {
      const double p = peak.steps[static_cast<std::size_t>(k)] == ProbClass::high ? pp.p_high : pp.p_low;
      const int begin = (peak.start_slot + k) * pp.state_duration;
      std::fill_n(pattern.per_tick_.begin() + begin, pp.state_duration, p);
    }
  }
  std::sort(params.peaks.begin(), params.peaks.end(),
            [](const PeakSpec& a, const PeakSpec& b) { return a.start_slot < b.start_slot; });
  pattern.params_ = std::move(params);
  return pattern;
}

EventPattern shift_pattern(const EventPattern& pattern, int delta_slots) {
  PatternParams p = pattern.params();
  for (auto& peak : p.peaks) peak.start_slot += delta_slots;
  return build_pattern(std::move(p));
}

EventPattern morph_pattern(const EventPattern& pattern, std::size_t peak_index, const Signature& steps,
                           std::string shape_name) {
  PatternParams p = pattern.params();
  if (peak_index >= p.peaks.size()) throw InvalidSpec("morph_pattern: no peak #" + std::to_string(peak_index));
  p.peaks[peak_index].steps = steps;
  p.peaks[peak_index].shape_name = std::move(shape_name);
  return build_pattern(std::move(p));
}

bool EventTrace::event_at(std::int64_t t) const {
  if (t < 0 || t >= size())
    throw std::out_of_range("tick " + std::to_string(t) + " outside trace of length " + std::to_string(size()));
  return bits_[static_cast<std::size_t>(t)] != 0;
}

std::int64_t EventTrace::count(std::int64_t begin, std::int64_t end) const {
  begin = std::max<std::int64_t>(begin, 0);
  end = std::min(end, size());
  std::int64_t n = 0;
  for (std::int64_t t = begin; t < end; ++t) n += bits_[static_cast<std::size_t>(t)];
  return n;
}

EventTrace sample_trace(const EventPattern& pattern, std::uint64_t seed, std::int64_t n_periods) {
  return sample_trace(std::vector<PatternSegment>{{0, pattern}}, seed, n_periods);
}

EventTrace sample_trace(const std::vector<PatternSegment>& segments, std::uint64_t seed, std::int64_t n_periods) {
  if (n_periods < 0) throw std::invalid_argument("sample_trace: negative period count");
  if (segments.empty() || segments.front().start_period != 0)
    throw std::invalid_argument("sample_trace: the first segment must start at period 0");
  const int period = segments.front().pattern.period_ticks();
  for (const auto& s : segments)
    if (s.pattern.period_ticks() != period) throw std::invalid_argument("sample_trace: segments disagree on period");

  const CounterRng rng = derive_stream(seed, "trace");
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n_periods * period));
  std::size_t seg = 0;
  std::string id;
  for (std::int64_t k = 0; k < n_periods; ++k) {
    while (seg + 1 < segments.size() && segments[seg + 1].start_period <= k) ++seg;
    const auto& pattern = segments[seg].pattern;
    for (int i = 0; i < period; ++i) {
      const auto t = static_cast<std::uint64_t>(k * period + i);
      bits[t] = rng.uniform_at(t) < pattern.probability_at(i) ? 1 : 0;
    }
  }
  for (const auto& s : segments) {
    if (!id.empty()) id += ';';
    id += std::to_string(s.start_period) + ":" + s.pattern.id();
  }
  return EventTrace(std::move(bits), seed, segments.size() == 1 ? segments.front().pattern.id() : id);
}

std::string write_rle(const EventTrace& trace) {
  std::ostringstream out;
  out << "# length=" << trace.size() << " seed=" << trace.seed() << " pattern=" << trace.pattern_id() << '\n';
  int last = -1;
  for (std::int64_t t = 0; t < trace.size(); ++t) {
    const int v = trace[t] ? 1 : 0;
    if (v != last) {
      out << t << ':' << v << '\n';
      last = v;
    }
  }
  return out.str();
}

namespace {

template <typename T>
T parse_number(std::string_view s, std::string_view what) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::invalid_argument("rle: bad " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

}  // namespace

EventTrace read_rle(std::string_view text) {
  std::int64_t length = -1;
  std::uint64_t seed = 0;
  std::string pattern;
  std::vector<std::pair<std::int64_t, int>> changes;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream fields(line.substr(1));
      std::string kv;
      while (fields >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        if (key == "length") length = parse_number<std::int64_t>(val, "length");
        if (key == "seed") seed = parse_number<std::uint64_t>(val, "seed");
        if (key == "pattern") pattern = val;
      }
      continue;
    }
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("rle: expected <tick>:<0|1>, got '" + line + "'");
    const auto tick = parse_number<std::int64_t>(std::string_view(line).substr(0, colon), "tick");
    const auto value = parse_number<int>(std::string_view(line).substr(colon + 1), "value");
    if (value != 0 && value != 1) throw std::invalid_argument("rle: value must be 0 or 1");
    if (!changes.empty() && tick <= changes.back().first) throw std::invalid_argument("rle: ticks must increase");
    changes.emplace_back(tick, value);
  }
  if (length < 0) throw std::invalid_argument("rle: missing length header");
  if (!changes.empty() && changes.front().first != 0 && length > 0)
    throw std::invalid_argument("rle: first delta must be at tick 0");
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(length), 0);
  for (std::size_t i = 0; i < changes.size(); ++i) {
    const auto begin = changes[i].first;
    const auto end = i + 1 < changes.size() ? changes[i + 1].first : length;
    if (end > length) throw std::invalid_argument("rle: tick beyond declared length");
    std::fill(bits.begin() + begin, bits.begin() + end, static_cast<std::uint8_t>(changes[i].second));
  }
  return EventTrace(std::move(bits), seed, pattern);
}

}  // namespace smarton

#include "smarton/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace smarton {

void ActionSet::validate() const {
  if (frequencies.size() < 2) throw std::invalid_argument("actions: need f0 = 0 and at least one nonzero frequency");
  if (frequencies.front() != 0.0) throw std::invalid_argument("actions: the first frequency must be 0");
  for (std::size_t i = 1; i < frequencies.size(); ++i)
    if (!(frequencies[i] > frequencies[i - 1])) throw std::invalid_argument("actions: frequencies must increase strictly");
}

std::vector<int> wake_offsets(double frequency, int slot_ticks) {
  std::vector<int> out;
  if (!(frequency > 0.0)) return out;
  for (int k = 0;; ++k) {
    const auto t = static_cast<int>(std::ceil(static_cast<double>(k) / frequency - 1e-9));
    if (t >= slot_ticks) break;
    if (out.empty() || t > out.back()) out.push_back(t);
  }
  return out;
}

int wake_count(double frequency, int slot_ticks) {
  return static_cast<int>(wake_offsets(frequency, slot_ticks).size());
}

double LearnerConfig::q_bound() const {
  const double per_step = state_duration * std::max(std::abs(reward_catch), std::abs(reward_miss));
  return per_step / (1.0 - gamma);
}

void validate(const LearnerConfig& c) {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("learner." + field + ": " + why);
  };
  if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) fail("alpha", "must satisfy 0 <= alpha <= 1");
  if (!(c.gamma >= 0.0 && c.gamma < 1.0)) fail("gamma", "must satisfy 0 <= gamma < 1");
  if (c.levels < 2) fail("levels", "need at least 2 energy levels");
  if (c.state_duration <= 0) fail("state_duration", "must be > 0");
  if (!(c.convergence_epsilon >= 0.0)) fail("convergence_epsilon", "must be >= 0");
  if (!(c.convergence_rel_tol >= 0.0)) fail("convergence_rel_tol", "must be >= 0");
  if (c.convergence_window < 1) fail("convergence_window", "must be >= 1");
  if (c.profile_window < 1) fail("profile_window", "must be >= 1");
  if (!(c.profile_rel_tol >= 0.0)) fail("profile_rel_tol", "must be >= 0");
  if (!(c.profile_abs_tol >= 0.0)) fail("profile_abs_tol", "must be >= 0");
  if (!(c.shape_threshold > 0.0 && c.shape_threshold <= 1.0)) fail("shape_threshold", "must lie in (0, 1]");
  if (!(c.noise_floor >= 0.0)) fail("noise_floor", "must be >= 0");
  if (c.peak_max_duration < c.state_duration) fail("peak_max_duration", "shorter than one state");
  if (c.probe_budget < 0) fail("probe_budget", "must be >= 0");
  if (c.probe_trigger < 1) fail("probe_trigger", "must be >= 1");
  try {
    c.actions.validate();
  } catch (const std::invalid_argument& e) {
    fail("frequencies", e.what());
  }
}

SlotProfile::SlotProfile(int slots)
    : counts_(static_cast<std::size_t>(std::max(slots, 0)), 0),
      visited_(static_cast<std::size_t>(std::max(slots, 0)), false) {}

bool SlotProfile::round_complete() const {
  return !visited_.empty() && std::all_of(visited_.begin(), visited_.end(), [](bool v) { return v; });
}

void SlotProfile::record(int slot, int count) {
  if (slot < 0 || slot >= slots()) throw std::out_of_range("profile slot " + std::to_string(slot));
  const auto i = static_cast<std::size_t>(slot);
  if (visited_[i]) throw std::logic_error("slot " + std::to_string(slot) + " profiled twice in one round");
  visited_[i] = true;
  counts_[i] = count;
  if (round_complete()) history_.push_back(counts_);
}

void SlotProfile::start_round() {
  std::fill(counts_.begin(), counts_.end(), 0);
  std::fill(visited_.begin(), visited_.end(), false);
}

std::vector<double> SlotProfile::mean_recent(int window) const {
  std::vector<double> mean(counts_.size(), 0.0);
  const int n = std::min<int>(window, static_cast<int>(history_.size()));
  if (n <= 0) return mean;
  for (int k = 0; k < n; ++k) {
    const auto& round = history_[history_.size() - 1 - static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += round[i];
  }
  for (auto& m : mean) m /= n;
  return mean;
}

bool profile_converged(const SlotProfile& profile, const LearnerConfig& config) {
  if (!profile.round_complete()) return false;
  const auto& h = profile.history();
  const auto window = static_cast<std::size_t>(config.profile_window);
  if (h.size() < std::max<std::size_t>(window, 1)) return false;
  for (std::size_t slot = 0; slot < h.back().size(); ++slot) {
    int lo = h.back()[slot];
    int hi = lo;
    for (std::size_t k = h.size() - window; k < h.size(); ++k) {
      lo = std::min(lo, h[k][slot]);
      hi = std::max(hi, h[k][slot]);
    }
    const double allowed = std::max(config.profile_abs_tol, config.profile_rel_tol * hi);
    if (hi - lo > allowed + 1e-12) return false;
  }
  return true;
}

ShapeKey classify_shape(std::span<const double> counts, double theta, double noise_floor) {
  if (counts.empty()) throw EmptyPeak();
  const double top = *std::max_element(counts.begin(), counts.end());
  if (!(top > noise_floor)) throw EmptyPeak();
  ShapeKey key;
  for (double c : counts) key.signature.push_back(c >= theta * top ? ProbClass::high : ProbClass::low);
  return key;
}

std::vector<DetectedPeak> detect_peaks(std::span<const double> counts, const LearnerConfig& config) {
  std::vector<DetectedPeak> peaks;
  const int n = static_cast<int>(counts.size());
  const int max_steps = std::max(1, config.max_peak_steps());
  int i = 0;
  while (i < n) {
    if (!(counts[static_cast<std::size_t>(i)] > config.noise_floor)) {
      ++i;
      continue;
    }
    int end = i;
    while (end < n && counts[static_cast<std::size_t>(end)] > config.noise_floor) ++end;
    for (int s = i; s < end; s += max_steps) {
      const int len = std::min(max_steps, end - s);
      peaks.push_back({s, classify_shape(counts.subspan(static_cast<std::size_t>(s), static_cast<std::size_t>(len)),
                                         config.shape_threshold, config.noise_floor)});
    }
    i = end;
  }
  return peaks;
}

QTable::QTable(ShapeKey shape, int levels, int actions)
    : shape_(std::move(shape)), levels_(levels), actions_(actions) {
  if (shape_.length() < 1) throw std::invalid_argument("Q-table shape must have at least one step");
  if (levels < 1 || actions < 1) throw std::invalid_argument("Q-table needs >= 1 level and >= 1 action");
  values_.assign(static_cast<std::size_t>(rows() * actions_), 0.0);
  touched_.assign(values_.size(), 0);
  partitions_.resize(static_cast<std::size_t>(levels_));
}

int QTable::state(int level, int step) const {
  if (level < 1 || level > levels_ || step < 1 || step > steps())
    throw std::out_of_range("state (level " + std::to_string(level) + ", step " + std::to_string(step) +
                            ") outside K=" + std::to_string(levels_) + ", T=" + std::to_string(steps()));
  return (level - 1) * steps() + (step - 1);
}

int QTable::touched_count() const {
  return static_cast<int>(std::count(touched_.begin(), touched_.end(), std::uint8_t{1}));
}

int QTable::converged_levels() const {
  return static_cast<int>(
      std::count_if(partitions_.begin(), partitions_.end(), [](const EntryPartition& p) { return p.converged; }));
}

void QTable::note_visit(int entry_level, int state, int affordable) {
  auto& reach = partition(entry_level).reach;
  if (reach.empty()) reach.assign(static_cast<std::size_t>(rows()), 0);
  auto& r = reach.at(static_cast<std::size_t>(state));
  r = static_cast<std::uint8_t>(std::max<int>(r, std::min(affordable, actions_)));
}

bool QTable::partition_covered(int entry_level) const {
  const auto& reach = partition(entry_level).reach;
  for (std::size_t s = 0; s < reach.size(); ++s)
    for (int a = 0; a < reach[s]; ++a)
      if (!touched(static_cast<int>(s), a)) return false;
  return true;
}

std::string QTable::serialize(double alpha, double gamma) const {
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof buf, " alpha=%.6f gamma=%.6f\n", alpha, gamma);
  out += "qtable shape=" + shape_.str() + " K=" + std::to_string(levels_) + " T=" + std::to_string(steps()) +
         " N=" + std::to_string(actions_) + buf;
  for (int level = 1; level <= levels_; ++level) {
    for (int step = 1; step <= steps(); ++step) {
      out += std::to_string(level) + ' ' + std::to_string(step);
      for (double v : row(state(level, step))) {
        std::snprintf(buf, sizeof buf, " %.6f", v);
        out += buf;
      }
      out += '\n';
    }
  }
  return out;
}

QTable QTable::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("qtable: empty input");
  std::istringstream header(line);
  std::string word;
  header >> word;
  if (word != "qtable") throw std::invalid_argument("qtable: missing 'qtable' header");
  std::string shape;
  int k = 0, t = 0, n = 0;
  while (header >> word) {
    const auto eq = word.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("qtable: bad header field '" + word + "'");
    const auto key = word.substr(0, eq);
    const auto val = word.substr(eq + 1);
    if (key == "shape") shape = val;
    else if (key == "K") k = std::stoi(val);
    else if (key == "T") t = std::stoi(val);
    else if (key == "N") n = std::stoi(val);
  }
  QTable table(ShapeKey::parse(shape), k, n);
  if (table.steps() != t) throw std::invalid_argument("qtable: T does not match the shape length");
  int rows_read = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    int level = 0, step = 0;
    if (!(fields >> level >> step)) throw std::invalid_argument("qtable: bad row '" + line + "'");
    const int s = table.state(level, step);
    for (int a = 0; a < n; ++a) {
      double v = 0.0;
      if (!(fields >> v)) throw std::invalid_argument("qtable: row '" + line + "' has too few values");
      table.set_value(s, a, v);
    }
    ++rows_read;
  }
  if (rows_read != table.rows()) throw std::invalid_argument("qtable: expected " + std::to_string(table.rows()) + " rows");
  return table;
}

int get_state(int level, int step, const QTable& table) { return table.state(level, step); }

StepReward step_reward(std::span<const std::int64_t> awake_ticks, const EventTrace& trace, std::int64_t window_begin,
                       std::int64_t window_end, const LearnerConfig& config) {
  StepReward out;
  for (auto t : awake_ticks) {
    if (t < window_begin || t >= window_end) throw std::out_of_range("awake tick outside the step window");
    const bool event = trace.event_at(t);
    ++out.awake;
    out.catches += event ? 1 : 0;
    out.reward += instant_reward(event, config);
  }
  return out;
}

QUpdate q_update(QTable& table, int state, int action, double reward, std::optional<int> next_state,
                 const LearnerConfig& config, int next_actions) {
  if (action < 0 || action >= table.actions()) throw std::out_of_range("action index");
  if (state < 0 || state >= table.rows()) throw std::out_of_range("state index");
  double bootstrap = 0.0;
  if (next_state) {
    if (*next_state < 0 || *next_state >= table.rows()) throw std::out_of_range("next state index");
    auto next = table.row(*next_state);
    if (next_actions > 0) next = next.first(static_cast<std::size_t>(std::min(next_actions, table.actions())));
    bootstrap = *std::max_element(next.begin(), next.end());
  }
  QUpdate u;
  const bool first_touch = !table.touched(state, action);
  u.before = table.value(state, action);
  u.after = (1.0 - config.alpha) * u.before + config.alpha * (reward + config.gamma * bootstrap);
  table.set_value(state, action, u.after);
  table.mark_touched(state, action);

  double scale = 0.0;
  for (double v : table.row(state)) scale = std::max(scale, std::abs(v));
  const double allowed = std::max(config.convergence_epsilon, config.convergence_rel_tol * scale);
  u.quiet = !first_touch && std::abs(u.after - u.before) <= allowed;
  return u;
}

std::vector<double> action_costs(const LearnerConfig& config, double wake_cost) {
  std::vector<double> costs;
  for (double f : config.actions.frequencies) costs.push_back(wake_count(f, config.state_duration) * wake_cost);
  return costs;
}

int affordable_actions(std::span<const double> costs, double stored) {
  int n = 1;
  while (n < static_cast<int>(costs.size()) && costs[static_cast<std::size_t>(n)] <= stored + kEnergyEpsilon) ++n;
  return n;
}

int choose_action(const QTable& table, int state, Phase phase, double stored, std::span<const double> costs,
                  CounterRng& rng) {
  if (phase == Phase::profiling) throw std::invalid_argument("choose_action: not defined in the profiling phase");
  const int n = std::min(affordable_actions(costs, stored), table.actions());
  if (phase == Phase::learning) return static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
  int best = 0;
  for (int a = 1; a < n; ++a)
    if (table.value(state, a) > table.value(state, best)) best = a;
  return best;
}

bool partition_converged(const QTable& table, int entry_level) { return table.partition(entry_level).converged; }

bool record_episode(QTable& table, int entry_level, bool all_updates_quiet, const LearnerConfig& config) {
  auto& p = table.partition(entry_level);
  ++p.episodes;
  p.quiet_streak = all_updates_quiet ? p.quiet_streak + 1 : 0;
  if (p.converged || p.quiet_streak < config.convergence_window || !table.partition_covered(entry_level)) return false;
  p.converged = true;
  p.episodes_to_converge = p.episodes;
  p.learn_order = table.next_learn_order();
  return true;
}

QTable& PhaseContext::table_for(const ShapeKey& shape, const LearnerConfig& config) {
  auto it = tables.find(shape);
  if (it == tables.end()) it = tables.emplace(shape, QTable(shape, config.levels, config.actions.size())).first;
  return it->second;
}

PhaseContext make_context(int slots) {
  PhaseContext ctx;
  ctx.profile = SlotProfile(slots);
  ctx.peak_of_slot.assign(static_cast<std::size_t>(slots), -1);
  return ctx;
}

namespace {

std::vector<ShapeKey> sorted_shapes(const std::vector<DetectedPeak>& peaks) {
  std::vector<ShapeKey> keys;
  for (const auto& p : peaks) keys.push_back(p.shape);
  std::sort(keys.begin(), keys.end());
  return keys;
}

bool shape_ready(const PhaseContext& ctx, const ShapeKey& shape) {
  const auto table = ctx.tables.find(shape);
  const auto level = ctx.entry_levels.find(shape);
  if (table == ctx.tables.end()) return false;
  if (table->second.fully_converged()) return true;
  if (level == ctx.entry_levels.end()) return false;
  return table->second.partition(level->second).converged;
}

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::profiling: return "phase 1";
    case Phase::learning: return "phase 2";
    case Phase::exploiting: return "phase 3";
  }
  return "?";
}

}  // namespace

void phase_transition(PhaseContext& ctx, const Observation& observation, const LearnerConfig& config) {
  auto invalid = [&](const char* what) {
    throw InvalidTransition(std::string(what) + " observed in " + phase_name(ctx.phase));
  };

  if (const auto* obs = std::get_if<ProfileConvergedObs>(&observation)) {
    if (ctx.phase != Phase::profiling) invalid("profile-converged");
    ctx.last_profile_was_drift =
        !ctx.peaks.empty() && sorted_shapes(ctx.peaks) == sorted_shapes(obs->peaks) && ctx.peaks != obs->peaks;
    ctx.peaks = obs->peaks;
    std::fill(ctx.peak_of_slot.begin(), ctx.peak_of_slot.end(), -1);
    for (std::size_t i = 0; i < ctx.peaks.size(); ++i) {
      const auto& p = ctx.peaks[i];
      for (int s = p.start_slot; s < p.start_slot + p.length() && s < ctx.slots(); ++s)
        ctx.peak_of_slot[static_cast<std::size_t>(s)] = static_cast<int>(i);
    }
    const bool ready = std::all_of(ctx.peaks.begin(), ctx.peaks.end(),
                                   [&](const DetectedPeak& p) { return shape_ready(ctx, p.shape); });
    ctx.phase = ready ? Phase::exploiting : Phase::learning;
    return;
  }
  if (std::holds_alternative<PartitionConvergedObs>(observation)) {
    if (ctx.phase != Phase::learning) invalid("partition-converged");
    ctx.phase = Phase::exploiting;
    return;
  }
  if (const auto* obs = std::get_if<ProbeCaughtObs>(&observation)) {
    if (ctx.phase != Phase::exploiting) invalid("probe-caught");
    if (obs->caught >= config.probe_trigger) {
      ctx.phase = Phase::profiling;
      ctx.profile = SlotProfile(ctx.slots());
      ++ctx.phase1_sessions;
    }
    return;
  }
  if (ctx.phase != Phase::exploiting) invalid("probe-quiet");
}

std::vector<int> probe_plan(const PhaseContext& ctx, const LearnerConfig& config, CounterRng& rng) {
  if (ctx.phase != Phase::exploiting) throw std::logic_error("probe_plan outside phase 3");
  std::vector<int> candidates;
  for (int s = 0; s < ctx.slots(); ++s)
    if (ctx.peak_of_slot[static_cast<std::size_t>(s)] < 0) candidates.push_back(s);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(config.probe_budget), candidates.size());
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform_int(candidates.size() - i));
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(k);
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

double profile_cost(const LearnerConfig& config, double wake_cost) {
  return wake_count(config.actions.frequencies.back(), config.state_duration) * wake_cost;
}

bool should_profile(const PhaseContext& ctx, int slot, double stored, const LearnerConfig& config, double wake_cost) {
  return ctx.phase == Phase::profiling && !ctx.profile.is_visited(slot) &&
         stored + kEnergyEpsilon >= profile_cost(config, wake_cost);
}

bool close_profile_pass(PhaseContext& ctx, const LearnerConfig& config) {
  ctx.profile.finish_pass();
  const bool converged = profile_converged(ctx.profile, config);
  if (!converged && ctx.profile.round_complete()) ctx.profile.start_round();
  return converged;
}

ProfilePassSummary run_profile_pass(PhaseContext& ctx, EnergyStore& store, const HarvestSource& source,
                                    const EventTrace& trace, std::int64_t period_index, int period_ticks,
                                    const LearnerConfig& config) {
  if (ctx.phase != Phase::profiling) throw std::logic_error("run_profile_pass outside phase 1");
  const int d = config.state_duration;
  if (period_ticks != ctx.slots() * d) throw std::invalid_argument("run_profile_pass: period does not match the profile");
  const auto offsets = wake_offsets(config.actions.frequencies.back(), d);
  std::vector<std::uint8_t> awake_at(static_cast<std::size_t>(d), 0);
  for (int o : offsets) awake_at[static_cast<std::size_t>(o)] = 1;

  ProfilePassSummary summary;
  const std::int64_t base = period_index * period_ticks;
  for (int slot = 0; slot < ctx.slots(); ++slot) {
    const bool profiling = should_profile(ctx, slot, store.stored(), config, store.wake_cost());
    int caught = 0;
    for (int i = 0; i < d; ++i) {
      const std::int64_t t = base + static_cast<std::int64_t>(slot) * d + i;
      if (profiling && awake_at[static_cast<std::size_t>(i)] && store.try_draw(store.wake_cost())) {
        caught += trace.event_at(t) ? 1 : 0;
      } else {
        harvest_tick(store, source, t);
      }
    }
    if (profiling) {
      ctx.profile.record(slot, caught);
      ++summary.slots_profiled;
      summary.catches += caught;
    }
  }
  summary.round_complete = ctx.profile.round_complete();
  summary.converged = close_profile_pass(ctx, config);
  return summary;
}

}  // namespace smarton

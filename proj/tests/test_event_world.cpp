#include "doctest.h"
#include "smarton/event_world.hpp"
#include "smarton/learner.hpp"

using namespace smarton;

namespace {

EventPattern pattern_of(std::vector<PeakSpec> peaks, double p_high = 0.8, double p_low = 0.2) {
  PatternParams p;
  p.peaks = std::move(peaks);
  p.p_high = p_high;
  p.p_low = p_low;
  return build_pattern(p);
}

// Event counts per slot of `peak`, summed over the trace.
std::vector<double> peak_counts(const EventTrace& trace, int period, int start_slot, int steps) {
  std::vector<double> counts(static_cast<std::size_t>(steps), 0.0);
  for (std::int64_t t = 0; t < trace.size(); ++t) {
    const int slot = static_cast<int>(t % period) / 30;
    if (slot >= start_slot && slot < start_slot + steps && trace[t]) counts[static_cast<std::size_t>(slot - start_slot)] += 1;
  }
  return counts;
}

}  // namespace

TEST_CASE("canonical shapes") {
  CHECK(to_string(make_peak("type1", 0).steps) == "LHL");
  CHECK(to_string(make_peak("type2", 0).steps) == "HHH");
  CHECK(to_string(make_peak("type3", 0).steps) == "HLL");
  CHECK(to_string(make_peak("type4", 0).steps) == "LLH");
  CHECK(to_string(make_peak("HLH", 0).steps) == "HLH");
  CHECK_THROWS_AS(make_peak("type9", 0), InvalidSpec);
}

TEST_CASE("pattern validation") {
  CHECK_THROWS_AS(pattern_of({make_peak("type1", 10), make_peak("type2", 12)}), InvalidSpec);
  CHECK_THROWS_AS(pattern_of({make_peak("type1", 38)}), InvalidSpec);
  CHECK_THROWS_AS(pattern_of({PeakSpec{5, {}, "custom"}}), InvalidSpec);
  CHECK_THROWS_AS(pattern_of({make_peak("HHHHH", 5)}), InvalidSpec);
  CHECK_THROWS_AS(pattern_of({make_peak("type1", 5)}, 0.2, 0.8), InvalidSpec);
  CHECK_NOTHROW(pattern_of({make_peak("type1", 10), make_peak("type2", 13)}));
  const auto p = pattern_of({make_peak("type3", 24), make_peak("type1", 10)});
  CHECK(p.peaks().front().start_slot == 10);
  CHECK(p.id() == "type1@10+type3@24");
}

TEST_CASE("degenerate probabilities") {
  const auto full = pattern_of({make_peak("type2", 10)}, 1.0, 0.0);
  const auto trace = sample_trace(full, 5, 3);
  CHECK(trace.count(0, trace.size()) == 3 * 90);
  for (std::int64_t t = 0; t < trace.size(); ++t) {
    const int slot = static_cast<int>(t % 1200) / 30;
    CHECK(trace[t] == (slot >= 10 && slot < 13));
  }
  const auto none = sample_trace(pattern_of({make_peak("type2", 10)}, 0.0, 0.0), 5, 3);
  CHECK(none.count(0, none.size()) == 0);
  CHECK_FALSE(none.event_at(17));
  CHECK_THROWS_AS(none.event_at(none.size()), std::out_of_range);
  CHECK_THROWS_AS(none.event_at(-1), std::out_of_range);
}

TEST_CASE("per-step frequencies follow the shape") {
  const auto trace = sample_trace(pattern_of({make_peak("type1", 10)}), 11, 200);
  const auto counts = peak_counts(trace, 1200, 10, 3);
  const double per_step = 200.0 * 30.0;
  CHECK(std::abs(counts[0] / per_step - 0.2) <= 0.02);
  CHECK(std::abs(counts[1] / per_step - 0.8) <= 0.02);
  CHECK(std::abs(counts[2] / per_step - 0.2) <= 0.02);
}

TEST_CASE("sampling is reproducible from the seed") {
  const auto p = pattern_of({make_peak("type4", 3)});
  CHECK(sample_trace(p, 7, 20) == sample_trace(p, 7, 20));
  CHECK(sample_trace(p, 7, 20).bits() != sample_trace(p, 8, 20).bits());
}

TEST_CASE("shift and morph keep or change the shape key") {
  LearnerConfig config;
  const auto base = pattern_of({make_peak("type1", 10)});
  CHECK(shift_pattern(base, 0) == base);
  const auto shifted = shift_pattern(base, 5);
  CHECK(shifted.peaks()[0].start_slot == 15);
  const auto a = peak_counts(sample_trace(base, 3, 50), 1200, 10, 3);
  const auto b = peak_counts(sample_trace(shifted, 3, 50), 1200, 15, 3);
  CHECK(classify_shape(a, config.shape_threshold) == classify_shape(b, config.shape_threshold));
  CHECK(classify_shape(b, config.shape_threshold).str() == "LHL");

  const auto morphed = morph_pattern(base, 0, parse_signature("HHH"), "type2");
  const auto m = peak_counts(sample_trace(morphed, 3, 50), 1200, 10, 3);
  CHECK(classify_shape(m, config.shape_threshold).str() == "HHH");
  CHECK_THROWS_AS(shift_pattern(base, 30), InvalidSpec);
}

TEST_CASE("schedules switch patterns at period boundaries") {
  const auto first = pattern_of({make_peak("type2", 0)}, 1.0, 0.0);
  const auto second = pattern_of({make_peak("type2", 20)}, 1.0, 0.0);
  const auto trace = sample_trace({{0, first}, {2, second}}, 1, 4);
  CHECK(trace[0]);
  CHECK(trace[1200]);
  CHECK_FALSE(trace[2400]);
  CHECK(trace[2400 + 600]);
}

TEST_CASE("run-length encoding round-trips") {
  const auto trace = sample_trace(pattern_of({make_peak("type3", 2)}), 99, 5);
  const auto text = write_rle(trace);
  CHECK(text.rfind("# length=6000 seed=99 pattern=type3@2", 0) == 0);
  CHECK(read_rle(text) == trace);
}

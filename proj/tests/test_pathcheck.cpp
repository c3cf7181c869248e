#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "floatnet/pathcheck.hpp"
#include "floatnet/rng.hpp"
#include "floatnet/sim.hpp"
#include "support/oracles.hpp"

using namespace floatnet;
using floatnet::testing::SlotInput;
using floatnet::testing::make_single_node_trace;

namespace {

RunResult traced_line_run(LineVariant variant, double v, Count buffer, std::int64_t horizon,
                          std::uint64_t seed) {
  const Scenario scenario = build_line_network(0.92, 0.9, variant);
  RunConfig config;
  config.v_param = v;
  config.buffer_size = buffer;
  config.horizon = horizon;
  config.burn_in = 0;
  config.seed = seed;
  config.record_trace = true;
  return run(config, scenario);
}

const std::vector<double> kLinePowerGamma{1600.0, 1200.0, 800.0, 400.0};

// Fake-only slot inputs realizing a given fake-backlog path from 0.
std::vector<SlotInput> fake_path_inputs(const std::vector<Count>& path) {
  std::vector<SlotInput> slots;
  for (std::size_t t = 0; t + 1 < path.size(); ++t) {
    const Count diff = path[t + 1] - path[t];
    SlotInput slot;
    if (diff >= 0) {
      slot.a_f = diff;
    } else {
      slot.b = -diff;
    }
    slots.push_back(slot);
  }
  return slots;
}

}  // namespace

TEST_CASE("lower-bound counting follows the band membership") {
  // Backlog path: q_fake ramps 0,2,4 with real queue empty.
  const Trace trace = make_single_node_trace({{0, 2, 0}, {0, 2, 0}, {0, 2, 0}}, 4);
  const std::vector<double> gamma{3.0};
  // Band with B=4, delta=1: [3 - 2 + 1, 3 + 2 - 1] = [2, 4].
  const LowerBoundTrace lower = lower_bound_admissions(trace, gamma, 4, 1);
  CHECK(lower.band_lo[0] == 2.0);
  CHECK(lower.band_hi[0] == 4.0);
  // q totals per slot: 0 (outside), 2 (inside), 4 (inside).
  CHECK(lower.a_r_hat_at(0, 1) == 0);
  CHECK(lower.a_r_hat_at(1, 1) == 0);  // no real arrivals anyway
}

TEST_CASE("lower-bound counting keeps real arrivals only inside the band") {
  const Trace trace = make_single_node_trace({{2, 0, 0}, {2, 0, 0}, {2, 0, 0}}, 10);
  // q totals: 0, 2, 4. Band [2, 4] again.
  const std::vector<double> gamma{3.0};
  const LowerBoundTrace lower = lower_bound_admissions(trace, gamma, 4, 1);
  CHECK(lower.a_r_hat_at(0, 1) == 0);
  CHECK(lower.a_r_hat_at(1, 1) == 2);
  CHECK(lower.a_r_hat_at(2, 1) == 2);
}

TEST_CASE("lower-bound policy rejects odd or undersized buffers") {
  const Trace trace = make_single_node_trace({{0, 0, 0}}, 5);
  const std::vector<double> gamma{1.0};
  CHECK_THROWS_AS(lower_bound_admissions(trace, gamma, 5, 1), ValidationError);
  CHECK_THROWS_AS(lower_bound_admissions(trace, gamma, 2, 2), ValidationError);
}

TEST_CASE("cumulative bound holds trivially on an idle trace") {
  const Trace trace = make_single_node_trace(std::vector<SlotInput>(16), 4);
  const std::vector<double> gamma{1.0};
  const LowerBoundTrace lower = lower_bound_admissions(trace, gamma, 4, 1);
  const CumulativeBoundReport report = verify_cumulative_bound(trace, lower, 0, 16);
  CHECK(report.all_hold);
  CHECK(report.nodes[1].lhs == 0);
  CHECK(report.nodes[1].rhs == -4);
}

TEST_CASE("cumulative bound holds across random windows of a live run") {
  const RunResult result = traced_line_run(LineVariant::power_min, 200.0, 20, 100000, 42);
  const Trace& trace = *result.trace;
  const LowerBoundTrace lower = lower_bound_admissions(trace, kLinePowerGamma, 20, 1);
  Xoshiro256PlusPlus rng(1);
  for (int w = 0; w < 200; ++w) {
    const std::int64_t t0 = static_cast<std::int64_t>(rng.next_below(trace.slot_count() - 1));
    const std::int64_t len =
        1 + static_cast<std::int64_t>(rng.next_below(trace.slot_count() - t0));
    const CumulativeBoundReport report = verify_cumulative_bound(trace, lower, t0, len);
    REQUIRE(report.all_hold);
  }
}

TEST_CASE("single-slot windows satisfy the bound by construction") {
  const RunResult result = traced_line_run(LineVariant::power_min, 50.0, 8, 5000, 7);
  const Trace& trace = *result.trace;
  const std::vector<double> gamma{400.0, 300.0, 200.0, 100.0};
  const LowerBoundTrace lower = lower_bound_admissions(trace, gamma, 8, 1);
  for (std::int64_t t = 0; t < trace.slot_count(); t += 97) {
    REQUIRE(verify_cumulative_bound(trace, lower, t, 1).all_hold);
  }
}

TEST_CASE("a path that stays above the threshold has no low intervals") {
  const Trace trace = make_single_node_trace(fake_path_inputs({9, 9, 9, 9, 9}), 4, 9);
  const std::vector<double> gamma{5.0};  // threshold 5 - 2 = 3
  const IntervalPartition part = partition_intervals(trace, 1, gamma, 4, 0, 3);
  CHECK(part.interval_count() == 0);
  for (auto flag : part.in_low) CHECK(flag == 0);
}

TEST_CASE("a single descent through the threshold yields one interval") {
  // Path 8,6,4,2,0,0 with threshold 5: low from the first slot where q < 5.
  const Trace trace = make_single_node_trace(fake_path_inputs({8, 6, 4, 2, 0, 0}), 4, 8);
  const std::vector<double> gamma{7.0};  // threshold 7 - 2 = 5
  const IntervalPartition part = partition_intervals(trace, 1, gamma, 4, 0, 4);
  REQUIRE(part.interval_count() == 1);
  CHECK(part.intervals[0].first == 2);  // q = 4 is the first value below 5
  CHECK(part.intervals[0].last == 4);
  REQUIRE(part.intervals[0].extrema.size() == 1);
  // The first genuine minimum is the first slot at the path's low plateau.
  CHECK(part.intervals[0].extrema[0].t_minus == 4);
  CHECK(part.intervals[0].extrema[0].genuine_minimum);
  CHECK(part.intervals[0].extrema[0].t_plus == 4);
  CHECK(part.pre_slots == std::vector<std::int64_t>{1});
}

TEST_CASE("sawtooth paths match the literal quadratic oracle") {
  Xoshiro256PlusPlus rng(606);
  for (int trial = 0; trial < 300; ++trial) {
    const std::int64_t length = 12 + static_cast<std::int64_t>(rng.next_below(40));
    std::vector<Count> path{static_cast<Count>(rng.next_below(8))};
    for (std::int64_t t = 0; t < length; ++t) {
      const Count step = static_cast<Count>(rng.next_below(7)) - 3;
      path.push_back(std::max<Count>(path.back() + step, 0));
    }
    const Trace trace = make_single_node_trace(fake_path_inputs(path), 6, path.front());
    const double threshold = static_cast<double>(rng.next_below(9)) - 0.5;
    const std::vector<double> gamma{threshold + 3.0};  // buffer 6 -> threshold offset 3
    const std::int64_t end = trace.slot_count() - 1 -
                             static_cast<std::int64_t>(rng.next_below(4));
    const std::int64_t begin = static_cast<std::int64_t>(rng.next_below(3));
    if (begin > end) continue;

    const IntervalPartition part = partition_intervals(trace, 1, gamma, 6, begin, end);

    std::vector<Count> qf;
    for (std::int64_t t = 0; t <= trace.slot_count(); ++t) qf.push_back(trace.q_fake(t, 1));
    const auto oracle =
        testing::oracle_partition(qf, begin, end, trace.slot_count(), threshold);

    REQUIRE(part.interval_count() == static_cast<std::int64_t>(oracle.intervals.size()));
    for (std::size_t k = 0; k < oracle.intervals.size(); ++k) {
      CHECK(part.intervals[k].first == oracle.intervals[k].first);
      CHECK(part.intervals[k].last == oracle.intervals[k].last);
      REQUIRE(part.intervals[k].extrema.size() == oracle.intervals[k].extrema.size());
      for (std::size_t j = 0; j < oracle.intervals[k].extrema.size(); ++j) {
        CHECK(part.intervals[k].extrema[j].t_minus == oracle.intervals[k].extrema[j].t_minus);
        CHECK(part.intervals[k].extrema[j].t_plus == oracle.intervals[k].extrema[j].t_plus);
        CHECK(part.intervals[k].extrema[j].genuine_minimum ==
              oracle.intervals[k].extrema[j].genuine);
      }
    }
    for (std::size_t i = 0; i < part.in_low.size(); ++i) {
      CHECK(part.in_low[i] == oracle.in_low[i]);
    }
  }
}

TEST_CASE("canonical rewrite is the identity when no fake packets are served") {
  const Trace trace = make_single_node_trace({{0, 2, 0}, {0, 1, 0}, {0, 3, 0}}, 4);
  const TransformedSegment segment = transform_path_nondecreasing(trace, 1, 0, 2, 1);
  for (std::int64_t t = 0; t < 3; ++t) {
    CHECK(segment.b_f[static_cast<std::size_t>(t)] == 0);
    CHECK(segment.a_f[static_cast<std::size_t>(t)] == trace.a_f(t, 1));
  }
  CHECK_FALSE(replay_segment(segment, 4).has_value());
}

TEST_CASE("canonical rewrite folds served fakes into reduced arrivals") {
  // One slot with q_fake = 5, three fake arrivals and two fake services.
  const Trace trace = make_single_node_trace({{0, 5, 0}, {0, 3, 2}, {0, 0, 0}}, 4);
  REQUIRE(trace.q_fake(1, 1) == 5);
  REQUIRE(trace.b_f(1, 1) == 2);
  const TransformedSegment segment = transform_path_nondecreasing(trace, 1, 1, 1, 1);
  CHECK(segment.b_f[0] == 0);
  CHECK(segment.a_f[0] == 1);
  CHECK(segment.a_f_adm[0] == 1);
  CHECK(segment.q_fake_after == 6);
  CHECK_FALSE(replay_segment(segment, 4).has_value());
}

TEST_CASE("canonical rewrite rejects decreasing segments") {
  const Trace trace = make_single_node_trace({{0, 4, 0}, {0, 0, 3}}, 4);
  CHECK_THROWS_AS(transform_path_nondecreasing(trace, 1, 0, 1, 1), ValidationError);
}

TEST_CASE("extracted non-decreasing segments replay bit-exactly") {
  const RunResult result = traced_line_run(LineVariant::power_min, 100.0, 10, 20000, 9);
  const Trace& trace = *result.trace;
  int replayed = 0;
  for (int n = 1; n <= trace.node_count(); ++n) {
    for (const auto& [begin, end] : nondecreasing_segments(trace, n, 3)) {
      const TransformedSegment segment =
          transform_path_nondecreasing(trace, n, begin, end, 1);
      const auto mismatch = replay_segment(segment, trace.buffer_size());
      REQUIRE_FALSE(mismatch.has_value());
      ++replayed;
    }
  }
  CHECK(replayed > 100);
}

TEST_CASE("recorded traces replay exactly and corruption is caught") {
  RunResult result = traced_line_run(LineVariant::power_min, 100.0, 10, 5000, 11);
  CHECK_FALSE(verify_trace_replay(*result.trace).has_value());

  // Tamper with one admitted amount via the text round trip.
  std::ostringstream out;
  write_trace(*result.trace, out);
  std::string text = out.str();
  const auto pos = text.find("\n2,");
  REQUIRE(pos != std::string::npos);
  text[pos + 1] = '3';  // shift a row out of order
  std::istringstream in(text);
  CHECK_THROWS_AS(read_trace(in), ValidationError);
}

TEST_CASE("interval dominance holds on a drop-free trace") {
  const Trace trace = make_single_node_trace({{1, 0, 1}, {1, 0, 1}, {1, 0, 1}, {1, 0, 1}}, 8);
  const std::vector<double> gamma{4.0};
  const LowerBoundTrace lower = lower_bound_admissions(trace, gamma, 8, 1);
  const IntervalPartition part = partition_intervals(trace, 1, gamma, 8, 0, 3);
  const IntervalCheckReport report = verify_interval_dominance(trace, part, lower, 1);
  CHECK(report.ok());
}

TEST_CASE("interval dominance reports zero violations on line-network runs") {
  for (auto [variant, gamma] :
       {std::pair{LineVariant::power_min, kLinePowerGamma},
        std::pair{LineVariant::throughput_max, std::vector<double>{200.0, 130.0, 100.0, 90.0}}}) {
    const RunResult result = traced_line_run(variant, 200.0, 16, 100000, 5);
    const auto reports = verify_interval_dominance_all(*result.trace, gamma, 16, 1);
    for (const auto& report : reports) {
      CHECK(report.ok());
      INFO("node ", report.node);
      for (const auto& violation : report.violations) {
        FAIL_CHECK(violation.check, " at slot ", violation.slot, ": ", violation.detail);
      }
    }
  }
}

TEST_CASE("windows starting with a loaded real queue use the slack variant") {
  const RunResult result = traced_line_run(LineVariant::power_min, 100.0, 8, 20000, 13);
  const Trace& trace = *result.trace;
  // Find a window start where node 1's real queue is nonempty.
  std::int64_t start = -1;
  for (std::int64_t t = 1000; t < trace.slot_count(); ++t) {
    if (trace.q_real(t, 1) > 0) {
      start = t;
      break;
    }
  }
  REQUIRE(start > 0);
  const std::vector<double> gamma{800.0, 600.0, 400.0, 200.0};
  const LowerBoundTrace lower = lower_bound_admissions(trace, gamma, 8, 1);
  const IntervalPartition part =
      partition_intervals(trace, 1, gamma, 8, start, trace.slot_count() - 1);
  const IntervalCheckReport report = verify_interval_dominance(trace, part, lower, 1);
  CHECK(report.low_set_slack_applied);
  CHECK(report.ok());
}

TEST_CASE("local-minimum properties hold on a live trace") {
  const RunResult result = traced_line_run(LineVariant::power_min, 200.0, 16, 200000, 21);
  const Trace& trace = *result.trace;
  const LowerBoundTrace lower = lower_bound_admissions(trace, kLinePowerGamma, 16, 1);
  std::int64_t genuine_total = 0;
  for (int n = 1; n <= 4; ++n) {
    const IntervalPartition part =
        partition_intervals(trace, n, kLinePowerGamma, 16, 0, trace.slot_count() - 1);
    const IntervalCheckReport report = verify_interval_dominance(trace, part, lower, 1);
    CHECK(report.ok());
    genuine_total += report.genuine_minima;
  }
  CHECK(genuine_total > 0);
}

TEST_CASE("degenerate zero-width bands still satisfy the cumulative bound") {
  const RunResult result = traced_line_run(LineVariant::power_min, 50.0, 2, 5000, 3);
  const Trace& trace = *result.trace;
  const std::vector<double> gamma{100.0, 80.0, 60.0, 40.0};
  // B = 2 = 2 * delta: the band collapses to a point.
  const LowerBoundTrace lower = lower_bound_admissions(trace, gamma, 2, 1);
  CHECK(lower.band_lo[0] == lower.band_hi[0]);
  CHECK(verify_cumulative_bound(trace, lower, 0, trace.slot_count()).all_hold);
}

TEST_CASE("metrics reproduce the deterministic unit-rate delay") {
  // One node, arrivals and services of one packet every slot, B = 4.
  std::vector<SlotInput> slots(2000, SlotInput{1, 0, 1});
  const Trace trace = make_single_node_trace(slots, 4);
  const MetricsReport report = compute_metrics(trace, 100, 4);
  CHECK(report.nodes[1].avg_admitted_real == doctest::Approx(1.0));
  CHECK(report.nodes[1].per_hop_delay == doctest::Approx(4.0));
  CHECK(report.nodes[1].delay_finite);
}

TEST_CASE("metrics flag starving queues instead of dividing by zero") {
  std::vector<SlotInput> slots(100, SlotInput{0, 1, 0});
  const Trace trace = make_single_node_trace(slots, 4);
  const MetricsReport report = compute_metrics(trace, 10, 4);
  CHECK_FALSE(report.nodes[1].delay_finite);
  CHECK(std::isinf(report.nodes[1].per_hop_delay));
}

TEST_CASE("deviation tails are non-increasing in the radius") {
  const RunResult result = traced_line_run(LineVariant::power_min, 50.0, 8, 50000, 17);
  const std::vector<double> gamma{400.0, 300.0, 200.0, 100.0};
  const MetricsReport report = compute_metrics(*result.trace, 500, 8, 0.0, gamma, 64);
  REQUIRE(report.deviation_tail.size() == 65);
  for (std::size_t i = 1; i < report.deviation_tail.size(); ++i) {
    CHECK(report.deviation_tail[i].second <= report.deviation_tail[i - 1].second);
  }
  CHECK(report.deviation_tail[0].second > 0.0);
}

TEST_CASE("run metrics agree with trace metrics") {
  const Scenario scenario = build_line_network(0.92, 0.9, LineVariant::throughput_max);
  RunConfig config;
  config.v_param = 100.0;
  config.buffer_size = 12;
  config.horizon = 40000;
  config.burn_in = 1000;
  config.seed = 23;
  config.record_trace = true;
  const RunResult result = run(config, scenario);
  const MetricsReport from_trace =
      compute_metrics(*result.trace, config.burn_in, config.buffer_size,
                      scenario.penalty_per_drop);
  CHECK(result.metrics.avg_cost == doctest::Approx(from_trace.avg_cost).epsilon(1e-12));
  CHECK(result.metrics.avg_cost_with_drop_penalty ==
        doctest::Approx(from_trace.avg_cost_with_drop_penalty).epsilon(1e-12));
  for (int n = 1; n <= 4; ++n) {
    CHECK(result.metrics.nodes[static_cast<std::size_t>(n)].avg_drops ==
          doctest::Approx(from_trace.nodes[static_cast<std::size_t>(n)].avg_drops));
    CHECK(result.metrics.nodes[static_cast<std::size_t>(n)].per_hop_delay ==
          doctest::Approx(from_trace.nodes[static_cast<std::size_t>(n)].per_hop_delay));
  }
}

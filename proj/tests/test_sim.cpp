#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "floatnet/rng.hpp"
#include "floatnet/sim.hpp"
#include "support/oracles.hpp"

using namespace floatnet;

TEST_CASE("line network structure matches its construction") {
  const Scenario power = build_line_network(0.92, 0.9, LineVariant::power_min);
  CHECK(power.node_count == 4);
  CHECK(power.states.size() == 32);
  for (const auto& state : power.states) CHECK(state.actions.size() == 16);
  CHECK(power.penalty_per_drop == 0.0);
  double prob = 0.0;
  for (const auto& state : power.states) prob += state.probability;
  CHECK(prob == doctest::Approx(1.0).epsilon(1e-14));

  const Scenario throughput = build_line_network(0.92, 0.9, LineVariant::throughput_max);
  CHECK(throughput.penalty_per_drop == 1.0);
  for (const auto& state : throughput.states) {
    const int channels = state.id % 16;
    const int arrival = state.id / 16;
    const int good_links = __builtin_popcount(static_cast<unsigned>(channels));
    CHECK(static_cast<int>(state.actions.size()) == (arrival + 1) * (1 << good_links));
    for (const auto& action : state.actions) {
      // Only good links may carry packets.
      for (int link = 0; link < 4; ++link) {
        const int to = link == 3 ? 0 : link + 2;
        if (action.services.at(link + 1, to) > 0) CHECK(((channels >> link) & 1) == 1);
      }
      CHECK(action.cost == -static_cast<double>(action.services.at(0, 1)));
    }
  }
}

TEST_CASE("no arrivals means no transmissions and zero cost") {
  const Scenario scenario = build_line_network(0.0, 0.9, LineVariant::power_min);
  RunConfig config;
  config.v_param = 100.0;
  config.buffer_size = 8;
  config.horizon = 20000;
  config.burn_in = 1000;
  config.seed = 5;
  const RunResult result = run(config, scenario);
  CHECK(result.metrics.avg_cost == 0.0);
  CHECK(result.metrics.total_throughput == 0.0);
}

TEST_CASE("identical configurations give bit-identical outputs") {
  const Scenario scenario = build_line_network(0.92, 0.9, LineVariant::power_min);
  RunConfig config;
  config.v_param = 120.0;
  config.buffer_size = 10;
  config.horizon = 30000;
  config.burn_in = 1200;
  config.seed = 99;
  config.record_trace = true;
  const RunResult first = run(config, scenario);
  const RunResult second = run(config, scenario);
  CHECK(first.metrics.avg_cost == second.metrics.avg_cost);
  CHECK(first.metrics.total_throughput == second.metrics.total_throughput);
  CHECK(*first.trace == *second.trace);

  config.seed = 100;
  const RunResult other = run(config, scenario);
  CHECK(first.metrics.avg_cost != other.metrics.avg_cost);
}

TEST_CASE("standard and floating runs choose the same actions") {
  const Scenario scenario = build_line_network(0.92, 0.9, LineVariant::power_min);
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    RunConfig config;
    config.v_param = 200.0;
    config.buffer_size = 8;
    config.horizon = 20000;
    config.burn_in = 100;
    config.seed = seed;
    config.mode = RunMode::both;
    const RunResult result = run(config, scenario);
    CHECK(result.diagnostics.decision_mismatches == 0);
  }
}

TEST_CASE("matched fake preloads keep the two implementations in lockstep") {
  const Scenario scenario = build_line_network(0.92, 0.9, LineVariant::throughput_max);
  RunConfig config;
  config.v_param = 150.0;
  config.buffer_size = 12;
  config.horizon = 20000;
  config.burn_in = 100;
  config.seed = 17;
  config.mode = RunMode::both;
  config.fake_init = {150, 110, 90, 70};
  const RunResult result = run(config, scenario);
  CHECK(result.diagnostics.decision_mismatches == 0);
}

TEST_CASE("drops never fail to grow the fake backlog in line runs") {
  const Scenario scenario = build_line_network(0.92, 0.9, LineVariant::power_min);
  RunConfig config;
  config.v_param = 150.0;
  config.buffer_size = 8;
  config.horizon = 50000;
  config.burn_in = 0;
  config.seed = 3;
  const RunResult result = run(config, scenario);
  CHECK(result.diagnostics.drop_growth_applicable);
  CHECK(result.diagnostics.drop_growth_checked > 0);
  CHECK(result.diagnostics.drop_growth_violations == 0);
}

TEST_CASE("empty measurement windows are rejected") {
  const Scenario scenario = build_line_network(0.92, 0.9, LineVariant::power_min);
  RunConfig config;
  config.v_param = 10.0;
  config.buffer_size = 4;
  config.horizon = 100;  // equals the default burn-in of 10 * V
  CHECK_THROWS_AS(run(config, scenario), ValidationError);
}

TEST_CASE("value lists expand ellipses arithmetically") {
  CHECK(parse_value_list("8,16,24") == std::vector<double>{8, 16, 24});
  CHECK(parse_value_list("8,12,...,40") ==
        std::vector<double>{8, 12, 16, 20, 24, 28, 32, 36, 40});
  CHECK_THROWS_AS(parse_value_list("8,...,40"), ValidationError);
  CHECK_THROWS_AS(parse_value_list("8,12,...,41"), ValidationError);
  CHECK_THROWS_AS(parse_value_list("abc"), ValidationError);
}

TEST_CASE("a single-value sweep matches the equivalent run") {
  const Scenario scenario = build_line_network(0.92, 0.9, LineVariant::power_min);
  SweepSpec spec;
  spec.base.v_param = 80.0;
  spec.base.horizon = 20000;
  spec.base.burn_in = 900;
  spec.base.seed = 12;
  spec.axis = SweepSpec::Axis::buffer_size;
  spec.values = {10.0};
  spec.seeds_per_point = 1;
  const std::string csv = sweep(spec, scenario);

  RunConfig config = spec.base;
  config.buffer_size = 10;
  config.seed = substream_seed(12, 0);
  const RunResult direct = run(config, scenario);

  std::istringstream lines(csv);
  std::string header, row;
  REQUIRE(std::getline(lines, header));
  CHECK(header ==
        "axis_value,seed,avg_cost,delay_1,delay_2,delay_3,delay_4,"
        "drop_rate_1,drop_rate_2,drop_rate_3,drop_rate_4,throughput");
  REQUIRE(std::getline(lines, row));
  std::ostringstream expected;
  expected << 10 << ',' << config.seed << ',';
  CHECK(row.substr(0, expected.str().size()) == expected.str());
  // The cost column must match the direct run exactly.
  std::istringstream fields(row);
  std::string field;
  std::getline(fields, field, ',');
  std::getline(fields, field, ',');
  std::getline(fields, field, ',');
  CHECK(std::stod(field) == doctest::Approx(direct.metrics.avg_cost).epsilon(1e-9));
}

TEST_CASE("sweeps are deterministic and strictly ordered") {
  const Scenario scenario = build_line_network(0.92, 0.9, LineVariant::power_min);
  SweepSpec spec;
  spec.base.v_param = 50.0;
  spec.base.horizon = 6000;
  spec.base.burn_in = 500;
  spec.base.seed = 77;
  spec.values = {8.0, 16.0};
  spec.seeds_per_point = 2;
  const std::string first = sweep(spec, scenario);
  const std::string second = sweep(spec, scenario);
  CHECK(first == second);
  CHECK(std::count(first.begin(), first.end(), '\n') == 5);  // header + 4 rows

  spec.values = {16.0, 8.0};
  CHECK_THROWS_AS(sweep(spec, scenario), ValidationError);
}

TEST_CASE("quick power regression stays near the known optimum") {
  const Scenario scenario = build_line_network(0.92, 0.9, LineVariant::power_min);
  RunConfig config;
  config.v_param = 200.0;
  config.buffer_size = 16;
  config.horizon = 300000;
  config.burn_in = 2000;
  config.seed = 8;
  config.fake_init = {1600, 1200, 800, 400};
  const RunResult result = run(config, scenario);
  CHECK(result.metrics.avg_cost == doctest::Approx(3.761).epsilon(0.01));
  // Empirical boundedness: the backlog stays an order of magnitude below
  // 50 * V.
  CHECK(result.diagnostics.max_total_backlog < 50 * 200);
}

TEST_CASE("quick throughput regression approaches the admission ceiling") {
  const Scenario scenario = build_line_network(0.92, 0.9, LineVariant::throughput_max);
  RunConfig config;
  config.v_param = 200.0;
  config.buffer_size = 40;
  config.horizon = 300000;
  config.burn_in = 2000;
  config.seed = 8;
  config.fake_init = {200, 130, 100, 90};
  const RunResult result = run(config, scenario);
  CHECK(result.metrics.total_throughput >= 0.85);
  double drop_rate = 0.0;
  for (int n = 1; n <= 4; ++n) {
    drop_rate += result.metrics.nodes[static_cast<std::size_t>(n)].avg_drops;
  }
  CHECK(drop_rate < 0.02);
  // Reward accounting: the penalized cost is admissions minus drops.
  CHECK(result.metrics.avg_cost_with_drop_penalty ==
        doctest::Approx(-result.metrics.total_throughput).epsilon(1e-3));
}

TEST_CASE("random scenarios validate and stay within their burst bound") {
  Xoshiro256PlusPlus rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    const Scenario scenario = random_scenario(rng);
    REQUIRE(validate_scenario(scenario).ok());
    const Count delta = compute_delta_max(scenario).delta_max;
    for (const auto& state : scenario.states) {
      for (const auto& action : state.actions) {
        for (int n = 1; n <= scenario.node_count; ++n) {
          CHECK(action.inflow[n] <= delta);
          CHECK(action.outflow[n] <= delta);
        }
      }
    }
  }
}

TEST_CASE("trace recording is rejected for standard-only runs") {
  const Scenario scenario = build_line_network(0.92, 0.9, LineVariant::power_min);
  RunConfig config;
  config.v_param = 10.0;
  config.buffer_size = 4;
  config.horizon = 500;
  config.burn_in = 10;
  config.mode = RunMode::standard;
  config.record_trace = true;
  CHECK_THROWS_AS(run(config, scenario), ValidationError);
}

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "floatnet/controller.hpp"
#include "floatnet/pathcheck.hpp"
#include "floatnet/rng.hpp"
#include "floatnet/trace.hpp"

namespace floatnet {

enum class RunMode { standard, floating, both };

struct RunConfig {
  std::string scenario_path;  // informational; run() takes the scenario directly
  double v_param = 0.0;
  Count buffer_size = 0;
  std::int64_t horizon = 0;
  std::int64_t burn_in = -1;  // < 0: defaults to 10 * v_param slots
  std::uint64_t seed = 0;
  RunMode mode = RunMode::floating;
  std::vector<Count> fake_init;  // empty: zero vector
  bool record_trace = false;
};

struct RunDiagnostics {
  std::int64_t decision_mismatches = 0;  // mode both only
  std::int64_t drop_growth_checked = 0;
  std::int64_t drop_growth_violations = 0;  // drop without fake-backlog growth
  Count max_total_backlog = 0;             // post burn-in, floating side
  bool drop_growth_applicable = false;     // buffer >= 2 * delta_max
};

struct RunResult {
  MetricsReport metrics;
  std::optional<Trace> trace;
  RunDiagnostics diagnostics;
};

// Seeded slot loop: sample a state, decide against the standard backlog or
// the real+fake sum, apply the queue updates, accumulate post-burn-in
// metrics. Identical (scenario, config) pairs give bit-identical results.
RunResult run(const RunConfig& config, const Scenario& scenario);

struct SweepSpec {
  enum class Axis { buffer_size, v_param };
  RunConfig base;
  Axis axis = Axis::buffer_size;
  std::vector<double> values;  // strictly increasing
  int seeds_per_point = 1;
};

// One run per (value, replicate); rows execute concurrently and are merged
// in deterministic order. The row seed is substream_seed(base.seed, row).
// Columns: axis_value, seed, avg_cost, delay_1..N, drop_rate_1..N,
// throughput.
std::string sweep(const SweepSpec& spec, const Scenario& scenario);

// Expands "8,16,24" or "8,12,...,40" (arithmetic progression through the
// final value) into a numeric list.
std::vector<double> parse_value_list(const std::string& text);

// ---------------------------------------------------------------------------
// Built-in scenario generators

enum class LineVariant { power_min, throughput_max };

// Four relay nodes in a row. A composite state is (exogenous arrival,
// per-link channel quality); links are sampled independently. power_min
// always admits arrivals and may transmit on any link at cost 1 (good
// channel) or 2 (bad); throughput_max chooses whether to admit, earns -1
// per admission and may transmit only on good links, with a unit drop
// penalty in reporting.
Scenario build_line_network(double arrival_prob, double good_prob, LineVariant variant);

struct RandomScenarioParams {
  int max_nodes = 4;
  int max_states = 4;
  int max_actions = 5;
  Count max_amount = 2;
};

// Valid-by-construction random instance for property tests and path
// verification at scale.
Scenario random_scenario(Xoshiro256PlusPlus& rng, const RandomScenarioParams& params = {});

}  // namespace floatnet

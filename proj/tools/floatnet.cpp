// floatnet: finite-buffer stochastic network optimization toolkit.
//
// Subcommands:
//   run       simulate a scenario and print a metrics record
//   sweep     run a buffer-size or V sweep and emit CSV
//   dual      solve the deterministic dual for the multiplier vector
//   check     verify a recorded trace against the sample-path properties
//   scenario  emit a built-in scenario config
//
// Exit codes: 0 success, 2 validation error, 3 verification failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "floatnet/dual.hpp"
#include "floatnet/pathcheck.hpp"
#include "floatnet/sim.hpp"

namespace {

using namespace floatnet;
using nlohmann::json;

constexpr int kExitValidation = 2;
constexpr int kExitCheckFailed = 3;

RunMode parse_mode(const std::string& text) {
  if (text == "standard") return RunMode::standard;
  if (text == "floating") return RunMode::floating;
  if (text == "both") return RunMode::both;
  throw ValidationError("unknown mode: " + text);
}

json metrics_to_json(const MetricsReport& metrics, const RunDiagnostics& diag, RunMode mode) {
  json doc;
  doc["avg_cost"] = metrics.avg_cost;
  doc["avg_cost_with_drop_penalty"] = metrics.avg_cost_with_drop_penalty;
  doc["throughput"] = metrics.total_throughput;
  doc["measured_slots"] = metrics.measured_slots;
  doc["max_total_backlog"] = diag.max_total_backlog;
  if (mode == RunMode::both) doc["decision_mismatches"] = diag.decision_mismatches;
  if (diag.drop_growth_applicable) {
    doc["drop_growth_violations"] = diag.drop_growth_violations;
  }
  doc["nodes"] = json::array();
  for (std::size_t n = 1; n < metrics.nodes.size(); ++n) {
    const NodeMetrics& node = metrics.nodes[n];
    json jn;
    jn["node"] = n;
    jn["delay"] = node.delay_finite ? json(node.per_hop_delay) : json();
    jn["drop_rate"] = node.avg_drops;
    jn["arrival_rate"] = node.avg_arrivals;
    jn["real_arrival_rate"] = node.avg_real_arrivals;
    jn["admitted_real_rate"] = node.avg_admitted_real;
    doc["nodes"].push_back(std::move(jn));
  }
  return doc;
}

int cmd_run(const std::string& config_path, double v, Count buffer, std::int64_t horizon,
            std::int64_t burn_in, std::uint64_t seed, const std::string& mode,
            const std::string& trace_path, const std::string& fake_init_text) {
  const Scenario scenario = load_scenario(config_path);
  RunConfig config;
  config.scenario_path = config_path;
  config.v_param = v;
  config.buffer_size = buffer;
  config.horizon = horizon;
  config.burn_in = burn_in;
  config.seed = seed;
  config.mode = parse_mode(mode);
  config.record_trace = !trace_path.empty();
  if (!fake_init_text.empty()) {
    for (double value : parse_value_list(fake_init_text)) {
      config.fake_init.push_back(static_cast<Count>(std::llround(value)));
    }
  }
  const RunResult result = run(config, scenario);
  if (result.trace) write_trace_file(*result.trace, trace_path);
  std::cout << metrics_to_json(result.metrics, result.diagnostics, config.mode).dump(2)
            << std::endl;
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::string& values, int seeds, double v, Count buffer, std::int64_t horizon,
              std::int64_t burn_in, std::uint64_t seed, const std::string& out_path) {
  const Scenario scenario = load_scenario(config_path);
  SweepSpec spec;
  spec.base.scenario_path = config_path;
  spec.base.v_param = v;
  spec.base.buffer_size = buffer;
  spec.base.horizon = horizon;
  spec.base.burn_in = burn_in;
  spec.base.seed = seed;
  spec.base.mode = RunMode::floating;
  if (axis == "buffer") {
    spec.axis = SweepSpec::Axis::buffer_size;
  } else if (axis == "v") {
    spec.axis = SweepSpec::Axis::v_param;
  } else {
    throw ValidationError("unknown sweep axis: " + axis);
  }
  spec.values = parse_value_list(values);
  spec.seeds_per_point = seeds;
  const std::string csv = sweep(spec, scenario);
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(out_path);
    if (!out) throw ValidationError("cannot write CSV file: " + out_path);
    out << csv;
  }
  return 0;
}

int cmd_dual(const std::string& config_path, double v, std::int64_t max_iters) {
  const Scenario scenario = load_scenario(config_path);
  const ValidationReport report = validate_scenario(scenario);
  if (!report.ok()) throw ValidationError("invalid scenario: " + report.violations.front().message);
  DualSolveConfig solve_config;
  if (max_iters > 0) solve_config.max_iters = max_iters;
  const DualSolution solution = solve_dual(v, scenario, solve_config);
  json doc;
  doc["gamma"] = solution.gamma;
  doc["dual_value"] = solution.dual_value;
  doc["iterations"] = solution.iterations;
  doc["residual"] = solution.residual;
  doc["converged"] = solution.converged;
  std::cout << doc.dump(2) << std::endl;
  if (!solution.converged) {
    std::cerr << "warning: dual solver did not reach its residual tolerance" << std::endl;
  }
  return 0;
}

int cmd_check(const std::string& trace_path, const std::string& config_path, double v,
              Count buffer, const std::string& gamma_text, std::int64_t dual_iters) {
  const Scenario scenario = load_scenario(config_path);
  const ValidationReport validation = validate_scenario(scenario);
  if (!validation.ok()) {
    throw ValidationError("invalid scenario: " + validation.violations.front().message);
  }
  Trace trace = read_trace_file(trace_path);
  trace.set_buffer_size(buffer);
  if (trace.node_count() != scenario.node_count) {
    throw ValidationError("trace has " + std::to_string(trace.node_count()) +
                          " nodes but the scenario has " + std::to_string(scenario.node_count));
  }
  const Count delta_max = compute_delta_max(scenario).delta_max;

  std::vector<double> gamma;
  if (!gamma_text.empty()) {
    gamma = parse_value_list(gamma_text);
    if (static_cast<int>(gamma.size()) != scenario.node_count) {
      throw ValidationError("--gamma needs one value per node");
    }
  } else {
    DualSolveConfig solve_config;
    if (dual_iters > 0) solve_config.max_iters = dual_iters;
    gamma = solve_dual(v, scenario, solve_config).gamma;
  }

  bool all_ok = true;
  auto line = [&all_ok](const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << ' ' << name;
    if (!detail.empty()) std::cout << ": " << detail;
    std::cout << '\n';
    if (!ok) all_ok = false;
  };

  const auto replay = verify_trace_replay(trace);
  line("replay", !replay.has_value(), replay.value_or(""));

  // Every drop must be followed by fake-backlog growth once the buffer has
  // room for two bursts.
  std::int64_t drop_growth_violations = 0;
  if (buffer >= 2 * delta_max) {
    for (std::int64_t t = 0; t < trace.slot_count(); ++t) {
      for (int n = 1; n <= trace.node_count(); ++n) {
        if (trace.drops(t, n) > 0 && trace.q_fake(t + 1, n) <= trace.q_fake(t, n)) {
          ++drop_growth_violations;
        }
      }
    }
    line("drop-growth", drop_growth_violations == 0,
         drop_growth_violations > 0 ? std::to_string(drop_growth_violations) + " violations" : "");
  } else {
    line("drop-growth", true, "skipped: buffer below twice the burst bound");
  }

  if (buffer % 2 == 0 && buffer >= 2 * delta_max) {
    const LowerBoundTrace lower = lower_bound_admissions(trace, gamma, buffer, delta_max);
    const CumulativeBoundReport bound =
        verify_cumulative_bound(trace, lower, 0, trace.slot_count());
    std::string detail;
    for (int n = 1; n <= trace.node_count(); ++n) {
      if (!bound.nodes[static_cast<std::size_t>(n)].holds) {
        detail += " node " + std::to_string(n);
      }
    }
    line("cumulative-bound", bound.all_hold, detail);

    std::int64_t violations = 0;
    for (int n = 1; n <= trace.node_count(); ++n) {
      const IntervalPartition part =
          partition_intervals(trace, n, gamma, buffer, 0, trace.slot_count() - 1);
      const IntervalCheckReport report = verify_interval_dominance(trace, part, lower, delta_max);
      violations += static_cast<std::int64_t>(report.violations.size());
      for (const auto& violation : report.violations) {
        std::cerr << "violation node " << n << " " << violation.check << " slot "
                  << violation.slot << ": " << violation.detail << '\n';
      }
    }
    line("interval-dominance", violations == 0,
         violations > 0 ? std::to_string(violations) + " violations" : "");
  } else {
    line("cumulative-bound", true, "skipped: needs an even buffer of at least 2*delta_max");
    line("interval-dominance", true, "skipped: needs an even buffer of at least 2*delta_max");
  }

  return all_ok ? 0 : kExitCheckFailed;
}

int cmd_scenario(const std::string& variant, double arrival_prob, double good_prob,
                 const std::string& out_path) {
  LineVariant line_variant;
  if (variant == "power") {
    line_variant = LineVariant::power_min;
  } else if (variant == "throughput") {
    line_variant = LineVariant::throughput_max;
  } else {
    throw ValidationError("unknown scenario variant: " + variant);
  }
  const Scenario scenario = build_line_network(arrival_prob, good_prob, line_variant);
  if (out_path.empty()) {
    std::cout << scenario_to_json(scenario);
  } else {
    save_scenario(scenario, out_path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-buffer stochastic network optimization toolkit"};
  app.require_subcommand(1);

  std::string config_path, trace_path, out_path, mode = "floating", axis = "buffer";
  std::string values, gamma_text, variant, fake_init_text;
  double v = 0.0, arrival_prob = 0.92, good_prob = 0.9;
  Count buffer = 0;
  std::int64_t horizon = 0, burn_in = -1, dual_iters = 0;
  std::uint64_t seed = 0;
  int seeds = 1;

  auto* run_cmd = app.add_subcommand("run", "simulate a scenario");
  run_cmd->add_option("--config", config_path, "scenario config file")->required();
  run_cmd->add_option("--v", v, "cost weight V")->required();
  run_cmd->add_option("--buffer", buffer, "real-queue buffer size B");
  run_cmd->add_option("--horizon", horizon, "slots to simulate")->required();
  run_cmd->add_option("--burn-in", burn_in, "slots excluded from averages (default 10*V)");
  run_cmd->add_option("--seed", seed, "RNG seed");
  run_cmd->add_option("--mode", mode, "standard | floating | both");
  run_cmd->add_option("--trace", trace_path, "write the sample path to this file");
  run_cmd->add_option("--fake-init", fake_init_text,
                      "initial fake backlogs, one value per node (default zeros)");

  auto* sweep_cmd = app.add_subcommand("sweep", "sweep buffer size or V");
  sweep_cmd->add_option("--config", config_path, "scenario config file")->required();
  sweep_cmd->add_option("--axis", axis, "buffer | v");
  sweep_cmd->add_option("--values", values, "comma list, '...' extends arithmetically")->required();
  sweep_cmd->add_option("--seeds", seeds, "replicates per value");
  sweep_cmd->add_option("--v", v, "cost weight V");
  sweep_cmd->add_option("--buffer", buffer, "buffer size (when sweeping V)");
  sweep_cmd->add_option("--horizon", horizon, "slots per run")->required();
  sweep_cmd->add_option("--burn-in", burn_in, "slots excluded from averages (default 10*V)");
  sweep_cmd->add_option("--seed", seed, "base seed; rows use derived substreams");
  sweep_cmd->add_option("--out", out_path, "CSV output path (default stdout)");

  auto* dual_cmd = app.add_subcommand("dual", "solve the deterministic dual");
  dual_cmd->add_option("--config", config_path, "scenario config file")->required();
  dual_cmd->add_option("--v", v, "cost weight V")->required();
  dual_cmd->add_option("--max-iters", dual_iters, "subgradient iteration cap");

  auto* check_cmd = app.add_subcommand("check", "verify a recorded trace");
  check_cmd->add_option("--trace", trace_path, "trace file")->required();
  check_cmd->add_option("--config", config_path, "scenario config file")->required();
  check_cmd->add_option("--v", v, "cost weight V used for the run")->required();
  check_cmd->add_option("--buffer", buffer, "buffer size used for the run")->required();
  check_cmd->add_option("--gamma", gamma_text, "multiplier vector (default: solve the dual)");
  check_cmd->add_option("--dual-iters", dual_iters, "iteration cap when solving the dual");

  auto* scenario_cmd = app.add_subcommand("scenario", "emit a built-in scenario config");
  scenario_cmd->add_option("--variant", variant, "power | throughput")->required();
  scenario_cmd->add_option("--arrival-prob", arrival_prob, "exogenous arrival probability");
  scenario_cmd->add_option("--good-prob", good_prob, "good-channel probability per link");
  scenario_cmd->add_option("--out", out_path, "output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      return cmd_run(config_path, v, buffer, horizon, burn_in, seed, mode, trace_path,
                     fake_init_text);
    }
    if (sweep_cmd->parsed()) {
      return cmd_sweep(config_path, axis, values, seeds, v, buffer, horizon, burn_in, seed,
                       out_path);
    }
    if (dual_cmd->parsed()) return cmd_dual(config_path, v, dual_iters);
    if (check_cmd->parsed()) {
      return cmd_check(trace_path, config_path, v, buffer, gamma_text, dual_iters);
    }
    if (scenario_cmd->parsed()) {
      return cmd_scenario(variant, arrival_prob, good_prob, out_path);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}

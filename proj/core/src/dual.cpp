#include "floatnet/dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace floatnet {

namespace {

double action_weight(const ActionSpec& action, std::span<const double> gamma, double v_param) {
  double w = v_param * action.cost;
  for (std::size_t n = 0; n < gamma.size(); ++n) {
    w += gamma[n] * static_cast<double>(action.drift[n + 1]);
  }
  return w;
}

struct DualEval {
  double value = 0.0;
  std::vector<int> minimizer_ids;
  std::vector<double> subgradient;        // size N
  std::vector<double> right_derivative;   // size N; over tied minimizers
};

// Single pass over all (state, action) pairs. The right derivative along
// +e_n is the probability-weighted minimum drift over each state's tied
// minimizers; it is only consulted when the subgradient vanishes.
DualEval evaluate_dual(std::span<const double> gamma, double v_param, const Scenario& scenario,
                       bool with_right_derivative) {
  const int n_nodes = scenario.node_count;
  DualEval eval;
  eval.minimizer_ids.reserve(scenario.states.size());
  eval.subgradient.assign(static_cast<std::size_t>(n_nodes), 0.0);
  if (with_right_derivative) {
    eval.right_derivative.assign(static_cast<std::size_t>(n_nodes), 0.0);
  }
  for (const auto& state : scenario.states) {
    double best = std::numeric_limits<double>::infinity();
    int best_id = 0;
    for (std::size_t k = 0; k < state.actions.size(); ++k) {
      const double w = action_weight(state.actions[k], gamma, v_param);
      if (w < best) {
        best = w;
        best_id = static_cast<int>(k);
      }
    }
    eval.value += state.probability * best;
    eval.minimizer_ids.push_back(best_id);
    const auto& chosen = state.actions[static_cast<std::size_t>(best_id)];
    for (int n = 1; n <= n_nodes; ++n) {
      eval.subgradient[static_cast<std::size_t>(n - 1)] +=
          state.probability * static_cast<double>(chosen.drift[n]);
    }
    if (with_right_derivative) {
      const double tie_eps = 1e-9 * (1.0 + std::abs(best));
      std::vector<Count> min_drift(static_cast<std::size_t>(n_nodes),
                                   std::numeric_limits<Count>::max());
      for (const auto& action : state.actions) {
        if (action_weight(action, gamma, v_param) <= best + tie_eps) {
          for (int n = 1; n <= n_nodes; ++n) {
            min_drift[static_cast<std::size_t>(n - 1)] =
                std::min(min_drift[static_cast<std::size_t>(n - 1)], action.drift[n]);
          }
        }
      }
      for (int n = 0; n < n_nodes; ++n) {
        eval.right_derivative[static_cast<std::size_t>(n)] +=
            state.probability * static_cast<double>(min_drift[static_cast<std::size_t>(n)]);
      }
    }
  }
  return eval;
}

}  // namespace

DualValueResult dual_value(std::span<const double> gamma, double v_param,
                           const Scenario& scenario) {
  if (static_cast<int>(gamma.size()) != scenario.node_count) {
    throw ValidationError("dual_value: gamma length " + std::to_string(gamma.size()) +
                          " does not match node count " + std::to_string(scenario.node_count));
  }
  DualEval eval = evaluate_dual(gamma, v_param, scenario, false);
  return DualValueResult{eval.value, std::move(eval.minimizer_ids)};
}

std::vector<double> dual_subgradient(std::span<const double> gamma, double v_param,
                                     const Scenario& scenario) {
  if (static_cast<int>(gamma.size()) != scenario.node_count) {
    throw ValidationError("dual_subgradient: gamma length mismatch");
  }
  return evaluate_dual(gamma, v_param, scenario, false).subgradient;
}

DualSolution solve_dual(double v_param, const Scenario& scenario, const DualSolveConfig& config) {
  const int n_nodes = scenario.node_count;
  const Count delta = compute_delta_max(scenario).delta_max;
  const double tolerance =
      config.tolerance >= 0.0 ? config.tolerance : 1e-3 * std::max(1.0, v_param);
  const double step0 = config.step_scale > 0.0
                           ? config.step_scale
                           : std::max(1.0, v_param) * static_cast<double>(delta);

  std::vector<double> gamma(static_cast<std::size_t>(n_nodes), 0.0);
  if (!config.init.empty()) {
    if (static_cast<int>(config.init.size()) != n_nodes) {
      throw ValidationError("solve_dual: init length mismatch");
    }
    gamma = config.init;
    for (double& g : gamma) g = std::max(g, 0.0);
  }

  // Trailing-window averages with doubling restarts: at any stop time the
  // window spans at least the most recent half of the iterations.
  std::vector<double> gamma_sum(static_cast<std::size_t>(n_nodes), 0.0);
  std::vector<double> step_sum(static_cast<std::size_t>(n_nodes), 0.0);
  std::int64_t window_len = 0;
  std::int64_t next_restart = 2;
  std::vector<double> prev_window_avg;

  std::int64_t t = 0;
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  bool stationary = false;
  while (t < config.max_iters) {
    ++t;
    DualEval eval = evaluate_dual(gamma, v_param, scenario, false);
    bool flat = true;
    for (double g : eval.subgradient) {
      if (g != 0.0) {
        flat = false;
        break;
      }
    }
    const double step = step0 / std::sqrt(static_cast<double>(t));
    std::vector<double> direction(static_cast<std::size_t>(n_nodes), 0.0);
    if (!flat) {
      direction = eval.subgradient;
    } else {
      // Exact-zero subgradient: some maximizer reached. Walk along every
      // coordinate whose one-sided derivative is still zero; if none is,
      // this is the maximal point of the optimal face.
      eval = evaluate_dual(gamma, v_param, scenario, true);
      bool any = false;
      for (int n = 0; n < n_nodes; ++n) {
        if (eval.right_derivative[static_cast<std::size_t>(n)] >= -1e-12) {
          direction[static_cast<std::size_t>(n)] = 1.0;
          any = true;
        }
      }
      if (!any) {
        residual = 0.0;
        converged = true;
        stationary = true;
        break;
      }
    }
    for (int n = 0; n < n_nodes; ++n) {
      gamma[static_cast<std::size_t>(n)] =
          std::max(gamma[static_cast<std::size_t>(n)] + step * direction[static_cast<std::size_t>(n)], 0.0);
      gamma_sum[static_cast<std::size_t>(n)] += gamma[static_cast<std::size_t>(n)];
      step_sum[static_cast<std::size_t>(n)] += direction[static_cast<std::size_t>(n)];
    }
    ++window_len;

    if (t == next_restart) {
      double norm = 0.0;
      std::vector<double> window_avg(static_cast<std::size_t>(n_nodes), 0.0);
      for (int n = 0; n < n_nodes; ++n) {
        norm = std::max(norm, std::abs(step_sum[static_cast<std::size_t>(n)]) /
                                  static_cast<double>(window_len));
        window_avg[static_cast<std::size_t>(n)] =
            gamma_sum[static_cast<std::size_t>(n)] / static_cast<double>(window_len);
      }
      residual = norm;
      // A small averaged subgradient alone is not evidence of being near
      // the maximizer on shallow stretches; require the windowed iterate
      // to have stopped moving as well.
      double drift_between_windows = std::numeric_limits<double>::infinity();
      if (!prev_window_avg.empty()) {
        drift_between_windows = 0.0;
        for (int n = 0; n < n_nodes; ++n) {
          drift_between_windows =
              std::max(drift_between_windows,
                       std::abs(window_avg[static_cast<std::size_t>(n)] -
                                prev_window_avg[static_cast<std::size_t>(n)]));
        }
      }
      if (t >= 1024 && residual <= tolerance && drift_between_windows <= tolerance) {
        converged = true;
        break;
      }
      prev_window_avg = std::move(window_avg);
      std::fill(gamma_sum.begin(), gamma_sum.end(), 0.0);
      std::fill(step_sum.begin(), step_sum.end(), 0.0);
      window_len = 0;
      next_restart = 2 * t;
    }
  }

  DualSolution solution;
  if (stationary || window_len == 0) {
    solution.gamma = gamma;
  } else {
    solution.gamma.assign(static_cast<std::size_t>(n_nodes), 0.0);
    double norm = 0.0;
    for (int n = 0; n < n_nodes; ++n) {
      solution.gamma[static_cast<std::size_t>(n)] =
          gamma_sum[static_cast<std::size_t>(n)] / static_cast<double>(window_len);
      norm = std::max(norm, std::abs(step_sum[static_cast<std::size_t>(n)]) /
                                static_cast<double>(window_len));
    }
    residual = norm;
    if (residual <= tolerance) converged = true;
  }
  solution.iterations = t;
  solution.residual = residual;
  solution.converged = converged;
  solution.dual_value = dual_value(solution.gamma, v_param, scenario).value;
  return solution;
}

namespace {

double tie_epsilon(double best) { return 1e-9 * (1.0 + std::abs(best)); }

}  // namespace

DualSolution brute_force_dual(double v_param, const Scenario& scenario, double grid_step,
                              double grid_max) {
  const int n_nodes = scenario.node_count;
  if (grid_step <= 0.0 || grid_max < 0.0) {
    throw ValidationError("brute_force_dual: grid_step must be positive and grid_max nonnegative");
  }
  if (n_nodes > 4) {
    throw ValidationError("oracle limited to desk scale: need node count <= 4, got " +
                          std::to_string(n_nodes));
  }
  const std::int64_t points = static_cast<std::int64_t>(std::floor(grid_max / grid_step)) + 1;

  auto value_at = [&](std::span<const double> gamma) {
    return dual_value(gamma, v_param, scenario).value;
  };

  DualSolution solution;
  solution.gamma.assign(static_cast<std::size_t>(n_nodes), 0.0);

  if (n_nodes <= 2) {
    const double total = std::pow(static_cast<double>(points), n_nodes);
    if (total > 2e7) {
      throw ValidationError("oracle limited to desk scale: full grid of " +
                            std::to_string(static_cast<std::int64_t>(total)) + " points");
    }
    // Pass 1 finds the maximum, pass 2 the largest point attaining it.
    std::vector<double> gamma(static_cast<std::size_t>(n_nodes), 0.0);
    double best = -std::numeric_limits<double>::infinity();
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<std::int64_t> index(static_cast<std::size_t>(n_nodes), 0);
      while (true) {
        for (int n = 0; n < n_nodes; ++n) {
          gamma[static_cast<std::size_t>(n)] =
              static_cast<double>(index[static_cast<std::size_t>(n)]) * grid_step;
        }
        const double v = value_at(gamma);
        if (pass == 0) {
          best = std::max(best, v);
        } else if (v >= best - tie_epsilon(best) &&
                   std::lexicographical_compare(solution.gamma.begin(), solution.gamma.end(),
                                                gamma.begin(), gamma.end())) {
          solution.gamma = gamma;
        }
        int pos = 0;
        while (pos < n_nodes) {
          if (++index[static_cast<std::size_t>(pos)] < points) break;
          index[static_cast<std::size_t>(pos)] = 0;
          ++pos;
        }
        if (pos == n_nodes) break;
      }
    }
    solution.iterations = 2 * static_cast<std::int64_t>(total);
  } else {
    // Cyclic coordinate line scans. Each scan takes the largest grid point
    // within tolerance of the line maximum, so the iterate keeps moving
    // across flat stretches instead of parking at their lower edge.
    std::vector<double> gamma(static_cast<std::size_t>(n_nodes), 0.0);
    const int max_sweeps = 64;
    std::int64_t evals = 0;
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
      bool changed = false;
      for (int n = 0; n < n_nodes; ++n) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::int64_t i = 0; i < points; ++i) {
          gamma[static_cast<std::size_t>(n)] = static_cast<double>(i) * grid_step;
          best = std::max(best, value_at(gamma));
          ++evals;
        }
        double chosen = 0.0;
        for (std::int64_t i = 0; i < points; ++i) {
          gamma[static_cast<std::size_t>(n)] = static_cast<double>(i) * grid_step;
          if (value_at(gamma) >= best - tie_epsilon(best)) {
            chosen = gamma[static_cast<std::size_t>(n)];
          }
          ++evals;
        }
        if (chosen != solution.gamma[static_cast<std::size_t>(n)]) changed = true;
        gamma[static_cast<std::size_t>(n)] = chosen;
        solution.gamma[static_cast<std::size_t>(n)] = chosen;
      }
      if (!changed) break;
    }
    solution.iterations = evals;
    solution.converged = sweep < max_sweeps;
  }

  solution.dual_value = value_at(solution.gamma);
  solution.residual = 0.0;
  if (n_nodes <= 2) solution.converged = true;
  return solution;
}

PolicyAggregates policy_aggregates(const RandomizedPolicy& policy, const Scenario& scenario) {
  if (policy.weights.size() != scenario.states.size()) {
    throw ValidationError("policy_aggregates: policy state count mismatch");
  }
  PolicyAggregates agg;
  agg.drift.assign(static_cast<std::size_t>(scenario.node_count) + 1, 0.0);
  for (std::size_t m = 0; m < scenario.states.size(); ++m) {
    const auto& state = scenario.states[m];
    if (policy.weights[m].size() != state.actions.size()) {
      throw ValidationError("policy_aggregates: action count mismatch at state " +
                            std::to_string(m));
    }
    for (std::size_t k = 0; k < state.actions.size(); ++k) {
      const double w = state.probability * policy.weights[m][k];
      if (w == 0.0) continue;
      agg.expected_cost += w * state.actions[k].cost;
      for (int n = 1; n <= scenario.node_count; ++n) {
        agg.drift[static_cast<std::size_t>(n)] +=
            w * static_cast<double>(state.actions[k].drift[n]);
      }
    }
  }
  return agg;
}

}  // namespace floatnet

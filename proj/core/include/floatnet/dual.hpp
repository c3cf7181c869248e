#pragma once

#include <span>
#include <vector>

#include "floatnet/model.hpp"

namespace floatnet {

// Multiplier vector for the deterministic relaxation, with solver
// diagnostics. residual is an estimate of the averaged-subgradient norm at
// the returned point; converged reports whether it fell below tolerance.
struct DualSolution {
  std::vector<double> gamma;
  double dual_value = 0.0;
  std::int64_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Stationary randomized policy: one probability vector over actions per
// state.
struct RandomizedPolicy {
  std::vector<std::vector<double>> weights;
};

struct DualValueResult {
  double value = 0.0;
  std::vector<int> minimizer_ids;  // per state, ties to the lowest id
};

// Concave dual objective: the probability-weighted sum over states of the
// cheapest action under weights gamma,
//   sum_m pi_m * min_k { V f_k + sum_n gamma_n * drift_n(k) }.
DualValueResult dual_value(std::span<const double> gamma, double v_param,
                           const Scenario& scenario);

// Supergradient at gamma: expected per-node drift of the per-state
// minimizers picked by dual_value.
std::vector<double> dual_subgradient(std::span<const double> gamma, double v_param,
                                     const Scenario& scenario);

struct DualSolveConfig {
  std::int64_t max_iters = 1'000'000;
  double tolerance = -1.0;   // < 0: defaults to 1e-3 * max(1, V)
  double step_scale = -1.0;  // < 0: defaults to max(1, V) * delta_max
  std::vector<double> init;  // empty: the zero vector
};

// Projected subgradient ascent with step a0/sqrt(t) and trailing-window
// iterate averaging. On a flat face the method additionally walks
// coordinates whose one-sided derivative is zero, so it settles at the
// maximal point of the face rather than wherever it first touched it.
DualSolution solve_dual(double v_param, const Scenario& scenario,
                        const DualSolveConfig& config = {});

// Independent grid maximizer used as the solver's oracle. Full grid for
// one or two nodes; cyclic coordinate-wise line scans up to four nodes.
// When several grid points tie (relative tolerance 1e-9), the largest one
// wins. Throws ValidationError beyond desk scale.
DualSolution brute_force_dual(double v_param, const Scenario& scenario, double grid_step,
                              double grid_max);

// Expected per-node drift and expected cost of a randomized policy;
// used for feasibility and weak-duality checks.
struct PolicyAggregates {
  std::vector<double> drift;  // index 0 unused
  double expected_cost = 0.0;
};
PolicyAggregates policy_aggregates(const RandomizedPolicy& policy, const Scenario& scenario);

}  // namespace floatnet

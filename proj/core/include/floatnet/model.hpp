#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace floatnet {

using Count = std::int64_t;

// Raised for malformed configs and invalid run parameters. The CLI maps
// this to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense (N+1)x(N+1) matrix of packet moves. Row/column 0 is the outside
// world: entry (0, j) admits packets into node j, entry (i, 0) makes
// packets leave the network from node i.
struct ServiceMatrix {
  int dim = 0;
  std::vector<Count> values;

  ServiceMatrix() = default;
  explicit ServiceMatrix(int dim_) : dim(dim_), values(static_cast<std::size_t>(dim_) * dim_, 0) {}

  Count at(int i, int j) const { return values[static_cast<std::size_t>(i) * dim + j]; }
  Count& at(int i, int j) { return values[static_cast<std::size_t>(i) * dim + j]; }

  bool operator==(const ServiceMatrix&) const = default;
};

// One feasible control action for a given network state.
struct ActionSpec {
  int id = 0;
  double cost = 0.0;
  ServiceMatrix services;

  // Derived by Scenario::finalize(): per-node aggregates over the matrix,
  // indexed 0..N. inflow[n] = sum_i services(i, n), outflow[n] = sum_j
  // services(n, j), drift[n] = inflow[n] - outflow[n].
  std::vector<Count> inflow;
  std::vector<Count> outflow;
  std::vector<Count> drift;
};

struct NetworkState {
  int id = 0;
  double probability = 0.0;
  std::vector<ActionSpec> actions;
};

// A full network instance: node count, the random-state table with one
// finite action set per state, and the per-drop penalty used in cost
// reporting (0 when drops are free).
struct Scenario {
  int node_count = 0;
  double penalty_per_drop = 0.0;
  std::vector<NetworkState> states;

  // Fills the per-action aggregate caches. Must be called after building
  // or mutating a scenario by hand; the loaders and generators call it.
  void finalize();
};

struct ScenarioBounds {
  Count delta_max = 0;
};

// Smallest per-node bound on aggregated arrivals and on aggregated
// services over all (state, action) pairs. A scenario whose matrices are
// all zero reports 1 so that buffer thresholds stay positive.
ScenarioBounds compute_delta_max(const Scenario& scenario);

struct Violation {
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Structural checks: probability normalization, nonempty action sets,
// matrix shape, zero diagonal, nonnegative entries. Returns all findings
// rather than stopping at the first.
ValidationReport validate_scenario(const Scenario& scenario);

// Best-effort feasibility slack estimate. Solves, over per-state action
// mixtures, the minimization of the worst node's expected net inflow; eta
// is the negated optimum. eta > 0 means some stationary randomized policy
// drains every node in expectation. Not a certificate either way.
struct SlaterEstimate {
  double eta = 0.0;
  std::vector<std::vector<double>> policy;  // mixture per state
  std::int64_t iterations = 0;
  std::string method;
};

SlaterEstimate check_slater(const Scenario& scenario, std::int64_t trials);

// Scenario config I/O. The documented JSON layout lives in
// docs/scenario.schema.json.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(std::istream& in, const std::string& origin = "<stream>");
void save_scenario(const Scenario& scenario, const std::string& path);
std::string scenario_to_json(const Scenario& scenario);

}  // namespace floatnet

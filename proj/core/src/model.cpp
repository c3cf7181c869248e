#include "floatnet/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace floatnet {

using nlohmann::json;

void Scenario::finalize() {
  const int dim = node_count + 1;
  for (auto& state : states) {
    for (auto& action : state.actions) {
      action.inflow.assign(dim, 0);
      action.outflow.assign(dim, 0);
      action.drift.assign(dim, 0);
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
          const Count mu = action.services.at(i, j);
          action.outflow[i] += mu;
          action.inflow[j] += mu;
        }
      }
      for (int n = 0; n < dim; ++n) action.drift[n] = action.inflow[n] - action.outflow[n];
    }
  }
}

ScenarioBounds compute_delta_max(const Scenario& scenario) {
  Count bound = 0;
  for (const auto& state : scenario.states) {
    for (const auto& action : state.actions) {
      for (int n = 1; n <= scenario.node_count; ++n) {
        bound = std::max(bound, action.inflow[n]);
        bound = std::max(bound, action.outflow[n]);
      }
    }
  }
  return ScenarioBounds{std::max<Count>(bound, 1)};
}

ValidationReport validate_scenario(const Scenario& scenario) {
  ValidationReport report;
  auto add = [&report](std::string code, std::string message) {
    report.violations.push_back({std::move(code), std::move(message)});
  };

  if (scenario.node_count < 1) {
    add("node_count", "node count must be at least 1, got " + std::to_string(scenario.node_count));
  }
  if (scenario.penalty_per_drop < 0.0) {
    add("penalty_sign", "penalty_per_drop must be nonnegative");
  }
  if (scenario.states.empty()) {
    add("no_states", "scenario has no states");
  }

  const int dim = scenario.node_count + 1;
  double prob_sum = 0.0;
  for (std::size_t m = 0; m < scenario.states.size(); ++m) {
    const auto& state = scenario.states[m];
    const std::string where = "state " + std::to_string(m);
    if (state.probability < 0.0 || state.probability > 1.0) {
      add("state_probability", where + ": probability " + std::to_string(state.probability) +
                                   " outside [0, 1]");
    }
    prob_sum += state.probability;
    if (state.actions.empty()) {
      add("empty_action_set", where + ": action set is empty");
    }
    for (std::size_t k = 0; k < state.actions.size(); ++k) {
      const auto& action = state.actions[k];
      const std::string at = where + " action " + std::to_string(k);
      if (action.services.dim != dim) {
        add("service_shape", at + ": service matrix is " + std::to_string(action.services.dim) +
                                 "x" + std::to_string(action.services.dim) + ", expected " +
                                 std::to_string(dim) + "x" + std::to_string(dim));
        continue;
      }
      for (int i = 0; i < dim; ++i) {
        if (action.services.at(i, i) != 0) {
          add("self_service", at + ": self-service must be zero at node " + std::to_string(i));
        }
        for (int j = 0; j < dim; ++j) {
          if (action.services.at(i, j) < 0) {
            add("negative_service", at + ": negative entry at (" + std::to_string(i) + ", " +
                                        std::to_string(j) + ")");
          }
        }
      }
    }
  }
  if (!scenario.states.empty() && std::abs(prob_sum - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "probabilities sum to " << prob_sum;
    add("probability_sum", msg.str());
  }
  return report;
}

namespace {

// Euclidean projection onto the probability simplex.
void project_simplex(std::vector<double>& v) {
  std::vector<double> u(v);
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0;
  double theta = 0.0;
  int rho = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    const double candidate = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - candidate > 0.0) {
      rho = static_cast<int>(i + 1);
      theta = candidate;
    }
  }
  if (rho == 0) {
    std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(v.size()));
    return;
  }
  for (auto& x : v) x = std::max(x - theta, 0.0);
  double total = 0.0;
  for (double x : v) total += x;
  if (total > 0.0) {
    for (auto& x : v) x /= total;
  }
}

// Worst-node expected net inflow of a mixture; the quantity check_slater
// minimizes. Also reports the achieving node.
double mixture_worst_drift(const Scenario& scenario,
                           const std::vector<std::vector<double>>& zeta, int* worst_node) {
  const int n_nodes = scenario.node_count;
  std::vector<double> drift(static_cast<std::size_t>(n_nodes) + 1, 0.0);
  for (std::size_t m = 0; m < scenario.states.size(); ++m) {
    const auto& state = scenario.states[m];
    for (std::size_t k = 0; k < state.actions.size(); ++k) {
      const double w = state.probability * zeta[m][k];
      if (w == 0.0) continue;
      const auto& d = state.actions[k].drift;
      for (int n = 1; n <= n_nodes; ++n) drift[n] += w * static_cast<double>(d[n]);
    }
  }
  double worst = -std::numeric_limits<double>::infinity();
  int arg = 1;
  for (int n = 1; n <= n_nodes; ++n) {
    if (drift[n] > worst) {
      worst = drift[n];
      arg = n;
    }
  }
  if (worst_node) *worst_node = arg;
  return worst;
}

std::vector<std::vector<double>> deterministic_policy(const Scenario& scenario,
                                                      const std::vector<int>& choice) {
  std::vector<std::vector<double>> zeta(scenario.states.size());
  for (std::size_t m = 0; m < scenario.states.size(); ++m) {
    zeta[m].assign(scenario.states[m].actions.size(), 0.0);
    zeta[m][static_cast<std::size_t>(choice[m])] = 1.0;
  }
  return zeta;
}

}  // namespace

SlaterEstimate check_slater(const Scenario& scenario, std::int64_t trials) {
  if (trials <= 0) throw ValidationError("check_slater: trials must be positive");
  const int n_nodes = scenario.node_count;
  const std::size_t n_states = scenario.states.size();

  SlaterEstimate best;
  best.eta = -std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<std::vector<double>>& zeta, const char* method) {
    const double eta = -mixture_worst_drift(scenario, zeta, nullptr);
    if (eta > best.eta) {
      best.eta = eta;
      best.policy = zeta;
      best.method = method;
    }
  };

  // Deterministic warm starts: per-state greedy on the summed drift and on
  // the per-state worst-node drift, plus the uniform mixture.
  std::vector<int> greedy_sum(n_states, 0), greedy_max(n_states, 0);
  for (std::size_t m = 0; m < n_states; ++m) {
    const auto& actions = scenario.states[m].actions;
    Count best_sum = std::numeric_limits<Count>::max();
    Count best_max = std::numeric_limits<Count>::max();
    for (std::size_t k = 0; k < actions.size(); ++k) {
      Count s = 0, mx = std::numeric_limits<Count>::min();
      for (int n = 1; n <= n_nodes; ++n) {
        s += actions[k].drift[n];
        mx = std::max(mx, actions[k].drift[n]);
      }
      if (n_nodes == 0) mx = 0;
      if (s < best_sum) {
        best_sum = s;
        greedy_sum[m] = static_cast<int>(k);
      }
      if (mx < best_max) {
        best_max = mx;
        greedy_max[m] = static_cast<int>(k);
      }
    }
  }
  consider(deterministic_policy(scenario, greedy_sum), "greedy_sum");
  consider(deterministic_policy(scenario, greedy_max), "greedy_minimax");

  std::vector<std::vector<double>> uniform(n_states);
  for (std::size_t m = 0; m < n_states; ++m) {
    uniform[m].assign(scenario.states[m].actions.size(),
                      1.0 / static_cast<double>(scenario.states[m].actions.size()));
  }
  consider(uniform, "uniform");

  // Exhaustive scan over deterministic policies while the product of action
  // set sizes stays at desk scale.
  double policy_count = 1.0;
  for (const auto& state : scenario.states) {
    policy_count *= static_cast<double>(state.actions.size());
  }
  if (policy_count <= static_cast<double>(std::min<std::int64_t>(trials, 65536))) {
    std::vector<int> odometer(n_states, 0);
    while (true) {
      consider(deterministic_policy(scenario, odometer), "vertex_enumeration");
      std::size_t pos = 0;
      while (pos < n_states) {
        if (++odometer[pos] < static_cast<int>(scenario.states[pos].actions.size())) break;
        odometer[pos] = 0;
        ++pos;
      }
      if (pos == n_states) break;
    }
  }

  // Projected subgradient descent on the worst-node drift, started from the
  // best candidate so far. Mixtures can beat every deterministic policy.
  const Count delta = compute_delta_max(scenario).delta_max;
  std::vector<std::vector<double>> zeta = best.policy;
  const double step0 = 1.0 / static_cast<double>(delta);
  for (std::int64_t t = 1; t <= trials; ++t) {
    int worst_node = 0;
    const double value = mixture_worst_drift(scenario, zeta, &worst_node);
    if (-value > best.eta) {
      best.eta = -value;
      best.policy = zeta;
      best.method = "projected_subgradient";
    }
    const double step = step0 / std::sqrt(static_cast<double>(t));
    for (std::size_t m = 0; m < n_states; ++m) {
      const auto& state = scenario.states[m];
      for (std::size_t k = 0; k < state.actions.size(); ++k) {
        const double g = state.probability *
                         static_cast<double>(state.actions[k].drift[worst_node]);
        zeta[m][k] -= step * g;
      }
      project_simplex(zeta[m]);
    }
  }
  best.iterations = trials;
  return best;
}

// ---------------------------------------------------------------------------
// JSON I/O

namespace {

Scenario scenario_from_json(const json& doc, const std::string& origin) {
  auto fail = [&origin](const std::string& what) -> ValidationError {
    return ValidationError(origin + ": " + what);
  };
  if (!doc.is_object()) throw fail("top level must be an object");
  if (!doc.contains("nodes") || !doc["nodes"].is_number_integer()) {
    throw fail("missing integer field 'nodes'");
  }
  Scenario scenario;
  scenario.node_count = doc["nodes"].get<int>();
  if (doc.contains("penalty_per_drop")) {
    if (!doc["penalty_per_drop"].is_number()) throw fail("'penalty_per_drop' must be a number");
    scenario.penalty_per_drop = doc["penalty_per_drop"].get<double>();
  }
  if (!doc.contains("states") || !doc["states"].is_array()) {
    throw fail("missing array field 'states'");
  }
  const int dim = scenario.node_count + 1;
  int state_id = 0;
  for (const auto& js : doc["states"]) {
    const std::string where = "states[" + std::to_string(state_id) + "]";
    NetworkState state;
    state.id = state_id++;
    if (!js.contains("probability") || !js["probability"].is_number()) {
      throw fail(where + ": missing numeric 'probability'");
    }
    state.probability = js["probability"].get<double>();
    if (!js.contains("actions") || !js["actions"].is_array()) {
      throw fail(where + ": missing array 'actions'");
    }
    int action_id = 0;
    for (const auto& ja : js["actions"]) {
      const std::string at = where + ".actions[" + std::to_string(action_id) + "]";
      ActionSpec action;
      action.id = action_id++;
      if (!ja.contains("cost") || !ja["cost"].is_number()) {
        throw fail(at + ": missing numeric 'cost'");
      }
      action.cost = ja["cost"].get<double>();
      action.services = ServiceMatrix(dim);
      if (ja.contains("services")) {
        if (!ja["services"].is_array()) throw fail(at + ": 'services' must be an array");
        for (const auto& triple : ja["services"]) {
          if (!triple.is_array() || triple.size() != 3 || !triple[0].is_number_integer() ||
              !triple[1].is_number_integer() || !triple[2].is_number_integer()) {
            throw fail(at + ": service entries must be [i, j, amount] integer triples");
          }
          const int i = triple[0].get<int>();
          const int j = triple[1].get<int>();
          const Count amount = triple[2].get<Count>();
          if (i < 0 || i >= dim || j < 0 || j >= dim) {
            throw fail(at + ": service endpoint out of range: [" + std::to_string(i) + ", " +
                       std::to_string(j) + "]");
          }
          if (action.services.at(i, j) != 0) {
            throw fail(at + ": duplicate service entry for (" + std::to_string(i) + ", " +
                       std::to_string(j) + ")");
          }
          action.services.at(i, j) = amount;
        }
      }
      state.actions.push_back(std::move(action));
    }
    scenario.states.push_back(std::move(state));
  }
  scenario.finalize();
  return scenario;
}

json scenario_to_json_doc(const Scenario& scenario) {
  json doc;
  doc["nodes"] = scenario.node_count;
  doc["penalty_per_drop"] = scenario.penalty_per_drop;
  doc["states"] = json::array();
  for (const auto& state : scenario.states) {
    json js;
    js["probability"] = state.probability;
    js["actions"] = json::array();
    for (const auto& action : state.actions) {
      json ja;
      ja["cost"] = action.cost;
      ja["services"] = json::array();
      for (int i = 0; i < action.services.dim; ++i) {
        for (int j = 0; j < action.services.dim; ++j) {
          if (action.services.at(i, j) != 0) {
            ja["services"].push_back({i, j, action.services.at(i, j)});
          }
        }
      }
      js["actions"].push_back(std::move(ja));
    }
    doc["states"].push_back(std::move(js));
  }
  return doc;
}

}  // namespace

Scenario parse_scenario(std::istream& in, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": " + e.what());
  }
  return scenario_from_json(doc, origin);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file: " + path);
  return parse_scenario(in, path);
}

std::string scenario_to_json(const Scenario& scenario) {
  return scenario_to_json_doc(scenario).dump(2) + "\n";
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write scenario file: " + path);
  out << scenario_to_json(scenario);
}

}  // namespace floatnet

#include "floatnet/controller.hpp"

namespace floatnet {

double dpp_weight(const ActionSpec& action, std::span<const Count> backlog,
                  const ControllerConfig& config) {
  double weight = config.v_param * action.cost;
  for (std::size_t n = 0; n < backlog.size(); ++n) {
    weight += static_cast<double>(backlog[n]) * static_cast<double>(action.drift[n + 1]);
  }
  return weight;
}

DecisionIndex decide_index(const NetworkState& state, std::span<const Count> backlog,
                           const ControllerConfig& config) {
  if (state.actions.empty()) {
    throw ValidationError("no feasible action: state " + std::to_string(state.id) +
                          " has an empty action set");
  }
  int best = 0;
  double best_weight = dpp_weight(state.actions[0], backlog, config);
  for (std::size_t k = 1; k < state.actions.size(); ++k) {
    const double w = dpp_weight(state.actions[k], backlog, config);
    if (w < best_weight) {
      best_weight = w;
      best = static_cast<int>(k);
    }
  }
  return DecisionIndex{best, best_weight};
}

Decision decide(const NetworkState& state, std::span<const Count> backlog,
                const ControllerConfig& config) {
  const DecisionIndex idx = decide_index(state, backlog, config);
  const ActionSpec& action = state.actions[static_cast<std::size_t>(idx.action_id)];
  Decision decision;
  decision.action_id = idx.action_id;
  decision.objective_value = idx.objective_value;
  decision.flows.arrivals.assign(action.inflow.begin() + 1, action.inflow.end());
  decision.flows.services.assign(action.outflow.begin() + 1, action.outflow.end());
  return decision;
}

}  // namespace floatnet

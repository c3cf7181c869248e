#pragma once

#include <span>
#include <vector>

#include "floatnet/model.hpp"

namespace floatnet {

enum class TieBreak { lowest_action_id };

struct ControllerConfig {
  double v_param = 0.0;
  TieBreak tie_break = TieBreak::lowest_action_id;
};

// Per-node aggregates of the chosen action, nodes 1..N.
struct SlotFlows {
  std::vector<Count> arrivals;  // a_n = total inflow to node n
  std::vector<Count> services;  // b_n = total outflow from node n
};

struct Decision {
  int action_id = 0;
  double objective_value = 0.0;
  SlotFlows flows;
};

// Weight of one action against the current backlog vector:
//   V * cost + sum_n backlog[n] * (inflow_n - outflow_n).
// Backlogs enter as exact integers; the sum is evaluated in a fixed node
// order so equal inputs give bit-identical weights.
double dpp_weight(const ActionSpec& action, std::span<const Count> backlog,
                  const ControllerConfig& config);

// Argmin of dpp_weight over the state's action list, ties to the lowest
// action id. Throws ValidationError on an empty action set.
Decision decide(const NetworkState& state, std::span<const Count> backlog,
                const ControllerConfig& config);

// Allocation-free variant used by the simulation loop; same argmin.
struct DecisionIndex {
  int action_id = 0;
  double objective_value = 0.0;
};
DecisionIndex decide_index(const NetworkState& state, std::span<const Count> backlog,
                           const ControllerConfig& config);

}  // namespace floatnet

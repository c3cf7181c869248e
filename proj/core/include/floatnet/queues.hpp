#pragma once

#include <span>
#include <vector>

#include "floatnet/model.hpp"

namespace floatnet {

// Unbounded queue update: max(q - services, 0) + arrivals. Shortfalls are
// absorbed by the clamp (blank transmissions).
Count standard_update(Count q, Count arrivals, Count services);

// Real packets are served before any slack is made up with fake ones.
struct ServiceSplit {
  Count real = 0;
  Count fake = 0;
};
ServiceSplit split_services(Count q_real, Count services);

// Admission against the bounded real buffer. Headroom is measured against
// the start-of-slot real backlog; rejected real arrivals are re-labelled as
// fake and keep flowing through the counter.
struct AdmitResult {
  Count admitted_real = 0;
  Count drops = 0;
  Count admitted_fake = 0;
};
AdmitResult admit_arrivals(Count q_real, Count buffer, Count real_arrivals, Count fake_arrivals);

// Paired bounded-real / counted-fake backlogs for all nodes (index 0
// unused so node ids match matrix indices).
struct FloatingQueueState {
  std::vector<Count> real;
  std::vector<Count> fake;
  Count buffer_size = 0;

  FloatingQueueState() = default;
  FloatingQueueState(int node_count, Count buffer)
      : real(static_cast<std::size_t>(node_count) + 1, 0),
        fake(static_cast<std::size_t>(node_count) + 1, 0),
        buffer_size(buffer) {}
};

// Per-node view of one slot's split flows.
struct NodeFlows {
  Count a_r = 0;      // real arrivals offered
  Count a_f = 0;      // fake arrivals offered
  Count a_r_adm = 0;  // real arrivals admitted
  Count a_f_adm = 0;  // fake arrivals admitted (includes drops)
  Count b_r = 0;      // real services
  Count b_f = 0;      // fake services
  Count drops = 0;
};

// Network-level split of one slot's service matrix into real and fake
// parts, with the per-node aggregates.
struct FlowSplit {
  ServiceMatrix mu_real;
  ServiceMatrix mu_fake;
  std::vector<NodeFlows> node;  // index 0 unused
};

// Splits the matrix row-by-row given each node's (real, fake) service
// amounts. Real packets go to outgoing links in ascending destination
// order, the network-exit link first; the remainder is fake. All exogenous
// rows stay real. Throws ValidationError when a row total disagrees with
// its split.
FlowSplit decompose_link_flows(const ServiceMatrix& mu,
                               std::span<const ServiceSplit> service_splits);

// Applies one slot of real/fake updates. The real queue moves by
// -b_r + a_r_adm and must stay inside [0, B]; leaving the range means the
// split was not produced by the admission rules and is reported as a
// logic error. The fake counter clamps at zero.
void floating_update(FloatingQueueState& state, const FlowSplit& split);

// Single-node composite: split services, admit arrivals against the
// start-of-slot backlog, then update. Returns the new node state and the
// slot's flow view.
struct FloatingNode {
  Count real = 0;
  Count fake = 0;
};
std::pair<FloatingNode, NodeFlows> step_floating_node(FloatingNode state, Count buffer,
                                                      Count a_r, Count a_f, Count services);

// Network-level composite used by the simulator: derives every node's
// split from the state and the slot's service matrix, routes real/fake
// flows across links, admits and updates. Returns the realized split.
FlowSplit step_floating_network(FloatingQueueState& state, const ServiceMatrix& mu);

}  // namespace floatnet

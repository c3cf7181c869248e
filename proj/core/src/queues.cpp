#include "floatnet/queues.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace floatnet {

Count standard_update(Count q, Count arrivals, Count services) {
  return std::max<Count>(q - services, 0) + arrivals;
}

ServiceSplit split_services(Count q_real, Count services) {
  const Count real = std::min(q_real, services);
  return ServiceSplit{real, services - real};
}

AdmitResult admit_arrivals(Count q_real, Count buffer, Count real_arrivals,
                           Count fake_arrivals) {
  const Count admitted_real = std::min(buffer - q_real, real_arrivals);
  const Count drops = real_arrivals - admitted_real;
  return AdmitResult{admitted_real, drops, fake_arrivals + drops};
}

FlowSplit decompose_link_flows(const ServiceMatrix& mu,
                               std::span<const ServiceSplit> service_splits) {
  const int dim = mu.dim;
  FlowSplit split;
  split.mu_real = ServiceMatrix(dim);
  split.mu_fake = ServiceMatrix(dim);
  split.node.assign(static_cast<std::size_t>(dim), NodeFlows{});

  // Row 0: exogenous admissions are always real.
  for (int j = 0; j < dim; ++j) split.mu_real.at(0, j) = mu.at(0, j);

  for (int i = 1; i < dim; ++i) {
    Count row_total = 0;
    for (int j = 0; j < dim; ++j) row_total += mu.at(i, j);
    const Count b_r = service_splits[static_cast<std::size_t>(i)].real;
    const Count b_f = service_splits[static_cast<std::size_t>(i)].fake;
    if (b_r + b_f != row_total || b_r < 0 || b_f < 0) {
      throw ValidationError("flow conservation violated at node " + std::to_string(i) +
                            ": row total " + std::to_string(row_total) + " vs split " +
                            std::to_string(b_r) + "+" + std::to_string(b_f));
    }
    Count remaining_real = b_r;
    for (int j = 0; j < dim; ++j) {
      const Count take = std::min(remaining_real, mu.at(i, j));
      split.mu_real.at(i, j) = take;
      split.mu_fake.at(i, j) = mu.at(i, j) - take;
      remaining_real -= take;
    }
    split.node[static_cast<std::size_t>(i)].b_r = b_r;
    split.node[static_cast<std::size_t>(i)].b_f = b_f;
  }

  // Column sums give each node's offered real and fake arrivals.
  for (int n = 1; n < dim; ++n) {
    Count a_r = 0, a_f = 0;
    for (int i = 0; i < dim; ++i) {
      a_r += split.mu_real.at(i, n);
      a_f += split.mu_fake.at(i, n);
    }
    split.node[static_cast<std::size_t>(n)].a_r = a_r;
    split.node[static_cast<std::size_t>(n)].a_f = a_f;
  }
  return split;
}

void floating_update(FloatingQueueState& state, const FlowSplit& split) {
  const int dim = static_cast<int>(state.real.size());
  for (int n = 1; n < dim; ++n) {
    const NodeFlows& f = split.node[static_cast<std::size_t>(n)];
    const Count next_real = state.real[static_cast<std::size_t>(n)] - f.b_r + f.a_r_adm;
    if (next_real < 0 || next_real > state.buffer_size) {
      throw std::logic_error("floating_update: real backlog " + std::to_string(next_real) +
                             " left [0, " + std::to_string(state.buffer_size) + "] at node " +
                             std::to_string(n));
    }
    state.real[static_cast<std::size_t>(n)] = next_real;
    state.fake[static_cast<std::size_t>(n)] =
        std::max<Count>(state.fake[static_cast<std::size_t>(n)] - f.b_f, 0) + f.a_f_adm;
  }
}

std::pair<FloatingNode, NodeFlows> step_floating_node(FloatingNode state, Count buffer,
                                                      Count a_r, Count a_f, Count services) {
  if (buffer < 1) throw ValidationError("step_floating_node: buffer must be at least 1");
  NodeFlows flows;
  const ServiceSplit split = split_services(state.real, services);
  flows.b_r = split.real;
  flows.b_f = split.fake;
  const AdmitResult admit = admit_arrivals(state.real, buffer, a_r, a_f);
  flows.a_r = a_r;
  flows.a_f = a_f;
  flows.a_r_adm = admit.admitted_real;
  flows.a_f_adm = admit.admitted_fake;
  flows.drops = admit.drops;

  FloatingNode next;
  next.real = state.real - flows.b_r + flows.a_r_adm;
  if (next.real < 0 || next.real > buffer) {
    throw std::logic_error("step_floating_node: real backlog left [0, B]");
  }
  next.fake = std::max<Count>(state.fake - flows.b_f, 0) + flows.a_f_adm;
  return {next, flows};
}

FlowSplit step_floating_network(FloatingQueueState& state, const ServiceMatrix& mu) {
  const int dim = mu.dim;
  std::vector<ServiceSplit> splits(static_cast<std::size_t>(dim));
  for (int n = 1; n < dim; ++n) {
    Count offered = 0;
    for (int j = 0; j < dim; ++j) offered += mu.at(n, j);
    splits[static_cast<std::size_t>(n)] =
        split_services(state.real[static_cast<std::size_t>(n)], offered);
  }
  FlowSplit split = decompose_link_flows(mu, splits);
  for (int n = 1; n < dim; ++n) {
    NodeFlows& f = split.node[static_cast<std::size_t>(n)];
    const AdmitResult admit = admit_arrivals(state.real[static_cast<std::size_t>(n)],
                                             state.buffer_size, f.a_r, f.a_f);
    f.a_r_adm = admit.admitted_real;
    f.a_f_adm = admit.admitted_fake;
    f.drops = admit.drops;
  }
  floating_update(state, split);
  return split;
}

}  // namespace floatnet

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "floatnet/model.hpp"
#include "floatnet/queues.hpp"

namespace floatnet {

// Recorded sample path of a floating-queue run. Per (slot, node) it keeps
// the eight-tuple of offered/admitted arrivals, split services and
// start-of-slot backlogs; per slot the sampled state, chosen action and
// cost. Storage is struct-of-arrays, int32 is plenty for every field.
class Trace {
 public:
  Trace() = default;
  Trace(int node_count, Count buffer_size);

  void reserve(std::int64_t slots);

  // Appends one slot. q-values are the backlogs the slot started from;
  // flows[n] describes node n (flows[0] is ignored).
  void push_slot(int state_id, int action_id, double cost,
                 const std::vector<NodeFlows>& flows,
                 const std::vector<Count>& q_real_before,
                 const std::vector<Count>& q_fake_before);

  int node_count() const { return node_count_; }
  Count buffer_size() const { return buffer_size_; }
  // The columnar file does not carry the buffer size; readers restore it
  // from the run configuration.
  void set_buffer_size(Count buffer) { buffer_size_ = buffer; }
  std::int64_t slot_count() const { return static_cast<std::int64_t>(state_id_.size()); }

  // Field accessors; t in [0, slot_count), n in [1, node_count].
  Count a_r(std::int64_t t, int n) const { return a_r_[idx(t, n)]; }
  Count a_f(std::int64_t t, int n) const { return a_f_[idx(t, n)]; }
  Count a_r_adm(std::int64_t t, int n) const { return a_r_adm_[idx(t, n)]; }
  Count a_f_adm(std::int64_t t, int n) const { return a_f_adm_[idx(t, n)]; }
  Count b_r(std::int64_t t, int n) const { return b_r_[idx(t, n)]; }
  Count b_f(std::int64_t t, int n) const { return b_f_[idx(t, n)]; }
  Count drops(std::int64_t t, int n) const { return a_r(t, n) - a_r_adm(t, n); }
  int state_id(std::int64_t t) const { return state_id_[static_cast<std::size_t>(t)]; }
  int action_id(std::int64_t t) const { return action_id_[static_cast<std::size_t>(t)]; }
  double cost(std::int64_t t) const { return cost_[static_cast<std::size_t>(t)]; }

  // Backlogs at the start of slot t; t == slot_count() gives the state the
  // final slot left behind.
  Count q_real(std::int64_t t, int n) const;
  Count q_fake(std::int64_t t, int n) const;
  Count q_total(std::int64_t t, int n) const { return q_real(t, n) + q_fake(t, n); }

  bool operator==(const Trace&) const = default;

 private:
  std::size_t idx(std::int64_t t, int n) const {
    return static_cast<std::size_t>(t) * node_count_ + (n - 1);
  }

  int node_count_ = 0;
  Count buffer_size_ = 0;
  std::vector<std::int32_t> a_r_, a_f_, a_r_adm_, a_f_adm_, b_r_, b_f_, q_real_, q_fake_;
  std::vector<std::int32_t> state_id_, action_id_;
  std::vector<double> cost_;
  std::vector<std::int32_t> final_q_real_, final_q_fake_;
};

// Columnar text format, one row per (slot, node):
//   t,n,state,action,a_r,a_f,a_r_adm,a_f_adm,b_r,b_f,q_real,q_fake,cost,drops
void write_trace(const Trace& trace, std::ostream& out);
void write_trace_file(const Trace& trace, const std::string& path);
Trace read_trace(std::istream& in, const std::string& origin = "<stream>");
Trace read_trace_file(const std::string& path);

}  // namespace floatnet

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "floatnet/dual.hpp"
#include "floatnet/trace.hpp"

namespace floatnet {

// ---------------------------------------------------------------------------
// Lower-bound counting policy
//
// An analysis-only rule replayed over a recorded trace: real arrivals are
// counted as admitted only in slots where the node's total backlog sits in
// a band of half-width B/2 - delta_max around gamma. Its cumulative
// admissions lower-bound the algorithm's by at most B on any window.

struct LowerBoundTrace {
  int node_count = 0;
  std::int64_t slot_count = 0;
  std::vector<std::int32_t> a_r_hat;  // per (slot, node); d_hat = a_r - a_r_hat
  std::vector<double> band_lo, band_hi;

  Count a_r_hat_at(std::int64_t t, int n) const {
    return a_r_hat[static_cast<std::size_t>(t) * node_count + (n - 1)];
  }
};

// Requires an even buffer size of at least 2 * delta_max.
LowerBoundTrace lower_bound_admissions(const Trace& trace, std::span<const double> gamma,
                                       Count buffer, Count delta_max);

// Window check of the cumulative admission bound over [t0, t0 + length):
// sum a_r_adm >= sum a_r_hat - B per node, for any starting backlog.
struct CumulativeBoundReport {
  struct Node {
    Count lhs = 0;
    Count rhs = 0;  // sum a_r_hat - B
    bool holds = false;
  };
  std::vector<Node> nodes;  // index 0 unused
  bool all_hold = false;
};
CumulativeBoundReport verify_cumulative_bound(const Trace& trace, const LowerBoundTrace& lower,
                                              std::int64_t t0, std::int64_t length);

// Prefix-summed variant for checking many windows of one trace.
class CumulativeBoundChecker {
 public:
  CumulativeBoundChecker(const Trace& trace, const LowerBoundTrace& lower);
  CumulativeBoundReport check(std::int64_t t0, std::int64_t length) const;

 private:
  int node_count_;
  std::int64_t slot_count_;
  Count buffer_;
  std::vector<std::int64_t> admitted_prefix_;  // (slot_count + 1) x node_count
  std::vector<std::int64_t> counted_prefix_;
};

// ---------------------------------------------------------------------------
// Interval partition of a fake-backlog path
//
// The inclusive window [begin, end] splits into the slots where the fake
// backlog is at least gamma_n - B/2 (the high set) and the rest (the low
// set). Each maximal low run k carries its first/last slot and the
// alternating local minima and maxima of the fake backlog inside it; a
// minimum is "genuine" when it satisfies the strict-descent and
// no-later-dip conditions rather than being clamped to the run's end.

struct LocalExtremum {
  std::int64_t t_minus = 0;
  std::int64_t t_plus = 0;
  bool genuine_minimum = false;
};

struct LowInterval {
  std::int64_t first = 0;  // t_k
  std::int64_t last = 0;   // t_k'
  std::vector<LocalExtremum> extrema;
};

struct IntervalPartition {
  int node = 0;
  std::int64_t begin = 0;
  std::int64_t end = 0;  // inclusive
  double threshold = 0.0;
  std::vector<std::uint8_t> in_low;     // per slot of the window
  std::vector<LowInterval> intervals;   // k = 1..K
  std::vector<std::int64_t> pre_slots;  // slot before each interval, if inside the window

  std::int64_t interval_count() const { return static_cast<std::int64_t>(intervals.size()); }
};

// Look-aheads (first later strict increase / strict dip of the fake
// backlog) read past the window into the rest of the trace, up to and
// including the final backlog the last slot leaves behind.
IntervalPartition partition_intervals(const Trace& trace, int node, std::span<const double> gamma,
                                      Count buffer, std::int64_t begin, std::int64_t end);

// ---------------------------------------------------------------------------
// Canonical rewrite of a non-decreasing segment
//
// On a segment whose fake backlog never decreases, fake services can be
// removed entirely: cap them at the available fake backlog, then fold them
// into reduced fake arrivals. Backlogs and all real-side fields are
// untouched, and the rewritten segment still satisfies every queue
// equation.

struct TransformedSegment {
  int node = 0;
  std::int64_t begin = 0;
  std::vector<Count> a_r, a_f, a_r_adm, a_f_adm, b_r, b_f, q_real, q_fake;
  Count q_real_after = 0;  // backlog the last slot leaves behind
  Count q_fake_after = 0;

  std::int64_t length() const { return static_cast<std::int64_t>(a_r.size()); }
};

// Requires q_fake non-decreasing across every transition of [begin, end]
// (including into the slot after end) and buffer >= 2 * delta_max.
TransformedSegment transform_path_nondecreasing(const Trace& trace, int node, std::int64_t begin,
                                                std::int64_t end, Count delta_max);

// Replays a segment through the queue equations from its initial backlogs
// and reports the first field that disagrees, or nullopt when the segment
// reproduces itself exactly.
std::optional<std::string> replay_segment(const TransformedSegment& segment, Count buffer);

// Re-derives every slot of a recorded trace from (a_r, a_f, b) and the
// initial backlogs; any deviation from the recorded fields is reported.
std::optional<std::string> verify_trace_replay(const Trace& trace);

// ---------------------------------------------------------------------------
// Interval dominance checks
//
// Over one node's window these verify, against the lower-bound policy:
//   high_set:      sum over high slots (minus interval predecessors) of
//                  a_r_adm dominates the counted admissions;
//   low_set:       the same over low slots plus interval predecessors,
//                  exactly when the window starts with an empty real queue,
//                  otherwise with slack B (reported);
//   local minima:  at every genuine minimum, the real queue equals the
//                  previous slot's real arrivals, the counting policy
//                  admitted nothing in that slot, and the fake backlog is
//                  below threshold + delta_max on both sides;
//   per interval:  admissions dominate counted admissions over
//                  [t_minus - 1, t_plus] of every genuine extremum pair.

struct IntervalCheckViolation {
  std::string check;
  std::int64_t k = 0;  // interval index (1-based), 0 when not applicable
  std::int64_t j = 0;  // extremum index (1-based), 0 when not applicable
  std::int64_t slot = 0;
  std::string detail;
};

struct IntervalCheckReport {
  int node = 0;
  bool low_set_slack_applied = false;  // window started with a non-empty real queue
  std::int64_t genuine_minima = 0;
  std::int64_t clamped_minima = 0;
  std::vector<IntervalCheckViolation> violations;
  bool ok() const { return violations.empty(); }
};

IntervalCheckReport verify_interval_dominance(const Trace& trace,
                                              const IntervalPartition& partition,
                                              const LowerBoundTrace& lower, Count delta_max);

// All nodes over the full trace; convenience for the CLI and tests.
std::vector<IntervalCheckReport> verify_interval_dominance_all(const Trace& trace,
                                                               std::span<const double> gamma,
                                                               Count buffer, Count delta_max);

// Scans one node for maximal segments with non-decreasing fake backlog of
// at least min_length slots.
std::vector<std::pair<std::int64_t, std::int64_t>> nondecreasing_segments(
    const Trace& trace, int node, std::int64_t min_length);

// ---------------------------------------------------------------------------
// Steady-state metrics

struct NodeMetrics {
  double avg_drops = 0.0;
  double avg_real_arrivals = 0.0;
  double avg_arrivals = 0.0;
  double avg_admitted_real = 0.0;
  double per_hop_delay = 0.0;  // buffer / admitted real rate
  bool delay_finite = false;
};

struct MetricsReport {
  double avg_cost = 0.0;
  double avg_cost_with_drop_penalty = 0.0;
  // Real packets leaving the network per slot. Filled by the simulator,
  // which sees the per-link flows; a bare trace does not carry them.
  double total_throughput = 0.0;
  std::int64_t measured_slots = 0;
  std::vector<NodeMetrics> nodes;  // index 0 unused
  // (radius, frequency of any node's total backlog deviating from gamma by
  // more than the radius); empty when no gamma is supplied.
  std::vector<std::pair<double, double>> deviation_tail;
};

MetricsReport compute_metrics(const Trace& trace, std::int64_t burn_in, Count buffer,
                              double penalty_per_drop = 0.0,
                              std::span<const double> gamma = {}, Count max_radius = -1);

}  // namespace floatnet

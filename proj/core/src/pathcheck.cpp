#include "floatnet/pathcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace floatnet {

namespace {

void require_window(const Trace& trace, std::int64_t begin, std::int64_t end) {
  if (begin < 0 || end < begin || end >= trace.slot_count()) {
    throw ValidationError("window [" + std::to_string(begin) + ", " + std::to_string(end) +
                          "] outside trace of " + std::to_string(trace.slot_count()) + " slots");
  }
}

}  // namespace

LowerBoundTrace lower_bound_admissions(const Trace& trace, std::span<const double> gamma,
                                       Count buffer, Count delta_max) {
  if (static_cast<int>(gamma.size()) != trace.node_count()) {
    throw ValidationError("lower_bound_admissions: gamma length mismatch");
  }
  if (buffer % 2 != 0 || buffer < 2 * delta_max) {
    throw ValidationError("lower-bound policy preconditions violated: buffer " +
                          std::to_string(buffer) + " must be even and at least 2*delta_max = " +
                          std::to_string(2 * delta_max));
  }
  LowerBoundTrace lower;
  lower.node_count = trace.node_count();
  lower.slot_count = trace.slot_count();
  lower.a_r_hat.resize(static_cast<std::size_t>(lower.slot_count) * lower.node_count);
  lower.band_lo.resize(static_cast<std::size_t>(lower.node_count));
  lower.band_hi.resize(static_cast<std::size_t>(lower.node_count));
  const double half = static_cast<double>(buffer) / 2.0;
  for (int n = 1; n <= lower.node_count; ++n) {
    lower.band_lo[static_cast<std::size_t>(n - 1)] =
        gamma[static_cast<std::size_t>(n - 1)] - half + static_cast<double>(delta_max);
    lower.band_hi[static_cast<std::size_t>(n - 1)] =
        gamma[static_cast<std::size_t>(n - 1)] + half - static_cast<double>(delta_max);
  }
  for (std::int64_t t = 0; t < lower.slot_count; ++t) {
    for (int n = 1; n <= lower.node_count; ++n) {
      const double q = static_cast<double>(trace.q_total(t, n));
      const bool inside = q >= lower.band_lo[static_cast<std::size_t>(n - 1)] &&
                          q <= lower.band_hi[static_cast<std::size_t>(n - 1)];
      lower.a_r_hat[static_cast<std::size_t>(t) * lower.node_count + (n - 1)] =
          inside ? static_cast<std::int32_t>(trace.a_r(t, n)) : 0;
    }
  }
  return lower;
}

CumulativeBoundReport verify_cumulative_bound(const Trace& trace, const LowerBoundTrace& lower,
                                              std::int64_t t0, std::int64_t length) {
  if (length < 1) throw ValidationError("verify_cumulative_bound: window must be nonempty");
  require_window(trace, t0, t0 + length - 1);
  CumulativeBoundReport report;
  report.nodes.assign(static_cast<std::size_t>(trace.node_count()) + 1, {});
  report.all_hold = true;
  for (int n = 1; n <= trace.node_count(); ++n) {
    Count lhs = 0;
    Count hat = 0;
    for (std::int64_t t = t0; t < t0 + length; ++t) {
      lhs += trace.a_r_adm(t, n);
      hat += lower.a_r_hat_at(t, n);
    }
    auto& row = report.nodes[static_cast<std::size_t>(n)];
    row.lhs = lhs;
    row.rhs = hat - trace.buffer_size();
    row.holds = lhs >= row.rhs;
    if (!row.holds) report.all_hold = false;
  }
  return report;
}

CumulativeBoundChecker::CumulativeBoundChecker(const Trace& trace, const LowerBoundTrace& lower)
    : node_count_(trace.node_count()),
      slot_count_(trace.slot_count()),
      buffer_(trace.buffer_size()) {
  const std::size_t stride = static_cast<std::size_t>(node_count_);
  admitted_prefix_.assign(static_cast<std::size_t>(slot_count_ + 1) * stride, 0);
  counted_prefix_.assign(static_cast<std::size_t>(slot_count_ + 1) * stride, 0);
  for (std::int64_t t = 0; t < slot_count_; ++t) {
    for (int n = 1; n <= node_count_; ++n) {
      const std::size_t at = static_cast<std::size_t>(t + 1) * stride + (n - 1);
      const std::size_t prev = static_cast<std::size_t>(t) * stride + (n - 1);
      admitted_prefix_[at] = admitted_prefix_[prev] + trace.a_r_adm(t, n);
      counted_prefix_[at] = counted_prefix_[prev] + lower.a_r_hat_at(t, n);
    }
  }
}

CumulativeBoundReport CumulativeBoundChecker::check(std::int64_t t0, std::int64_t length) const {
  if (length < 1 || t0 < 0 || t0 + length > slot_count_) {
    throw ValidationError("cumulative bound window outside the trace");
  }
  CumulativeBoundReport report;
  report.nodes.assign(static_cast<std::size_t>(node_count_) + 1, {});
  report.all_hold = true;
  const std::size_t stride = static_cast<std::size_t>(node_count_);
  for (int n = 1; n <= node_count_; ++n) {
    const std::size_t lo = static_cast<std::size_t>(t0) * stride + (n - 1);
    const std::size_t hi = static_cast<std::size_t>(t0 + length) * stride + (n - 1);
    auto& row = report.nodes[static_cast<std::size_t>(n)];
    row.lhs = admitted_prefix_[hi] - admitted_prefix_[lo];
    row.rhs = counted_prefix_[hi] - counted_prefix_[lo] - buffer_;
    row.holds = row.lhs >= row.rhs;
    if (!row.holds) report.all_hold = false;
  }
  return report;
}

IntervalPartition partition_intervals(const Trace& trace, int node, std::span<const double> gamma,
                                      Count buffer, std::int64_t begin, std::int64_t end) {
  require_window(trace, begin, end);
  if (node < 1 || node > trace.node_count()) {
    throw ValidationError("partition_intervals: node out of range");
  }
  IntervalPartition part;
  part.node = node;
  part.begin = begin;
  part.end = end;
  part.threshold = gamma[static_cast<std::size_t>(node - 1)] - static_cast<double>(buffer) / 2.0;

  // Look-ahead tables over [begin, T] where T is the backlog index after
  // the last slot: first later strict rise and first later strict dip of
  // the fake backlog, with past-the-data sentinels chosen so that
  // "no dip before the next rise" is exactly ns > ng.
  const std::int64_t avail = trace.slot_count();  // q_fake defined on [0, avail]
  const std::int64_t ng_missing = avail + 1;
  const std::int64_t ns_missing = avail + 2;
  const std::size_t span = static_cast<std::size_t>(avail - begin + 1);
  std::vector<std::int64_t> next_rise(span), next_dip(span);
  {
    std::vector<std::pair<Count, std::int64_t>> stack;  // strictly decreasing values
    for (std::int64_t t = avail; t >= begin; --t) {
      const Count q = trace.q_fake(t, node);
      while (!stack.empty() && stack.back().first <= q) stack.pop_back();
      next_rise[static_cast<std::size_t>(t - begin)] =
          stack.empty() ? ng_missing : stack.back().second;
      stack.emplace_back(q, t);
    }
    stack.clear();
    for (std::int64_t t = avail; t >= begin; --t) {
      const Count q = trace.q_fake(t, node);
      while (!stack.empty() && stack.back().first >= q) stack.pop_back();
      next_dip[static_cast<std::size_t>(t - begin)] =
          stack.empty() ? ns_missing : stack.back().second;
      stack.emplace_back(q, t);
    }
  }
  auto is_local_min = [&](std::int64_t t) {
    const bool descended =
        t == begin || trace.q_fake(t, node) < trace.q_fake(t - 1, node);
    return descended && next_dip[static_cast<std::size_t>(t - begin)] >
                            next_rise[static_cast<std::size_t>(t - begin)];
  };

  part.in_low.resize(static_cast<std::size_t>(end - begin + 1));
  for (std::int64_t t = begin; t <= end; ++t) {
    part.in_low[static_cast<std::size_t>(t - begin)] =
        static_cast<double>(trace.q_fake(t, node)) < part.threshold ? 1 : 0;
  }
  auto low = [&](std::int64_t t) { return part.in_low[static_cast<std::size_t>(t - begin)] != 0; };

  std::int64_t cursor = begin;
  while (cursor <= end) {
    while (cursor <= end && !low(cursor)) ++cursor;
    if (cursor > end) break;
    LowInterval interval;
    interval.first = cursor;
    while (cursor + 1 <= end && low(cursor + 1)) ++cursor;
    interval.last = cursor;
    ++cursor;
    if (interval.first - 1 >= begin) part.pre_slots.push_back(interval.first - 1);

    std::int64_t prev_plus = interval.first - 1;
    while (true) {
      std::int64_t t_minus = interval.last;
      bool genuine = false;
      for (std::int64_t t = prev_plus + 1; t <= interval.last; ++t) {
        if (is_local_min(t)) {
          t_minus = t;
          genuine = true;
          break;
        }
      }
      std::int64_t t_plus = interval.last;
      for (std::int64_t t = t_minus + 1; t <= interval.last; ++t) {
        if (trace.q_fake(t, node) > trace.q_fake(t + 1, node)) {
          t_plus = t;
          break;
        }
      }
      interval.extrema.push_back(LocalExtremum{t_minus, t_plus, genuine});
      if (t_plus >= interval.last) break;
      prev_plus = t_plus;
    }
    part.intervals.push_back(std::move(interval));
  }
  return part;
}

TransformedSegment transform_path_nondecreasing(const Trace& trace, int node, std::int64_t begin,
                                                std::int64_t end, Count delta_max) {
  require_window(trace, begin, end);
  if (trace.buffer_size() < 2 * delta_max) {
    throw ValidationError("transform_path_nondecreasing: buffer below 2*delta_max");
  }
  for (std::int64_t t = begin; t <= end; ++t) {
    if (trace.q_fake(t + 1, node) < trace.q_fake(t, node)) {
      throw ValidationError("segment not non-decreasing: fake backlog drops at slot " +
                            std::to_string(t + 1));
    }
  }
  TransformedSegment seg;
  seg.node = node;
  seg.begin = begin;
  const std::int64_t len = end - begin + 1;
  for (auto* v : {&seg.a_r, &seg.a_f, &seg.a_r_adm, &seg.a_f_adm, &seg.b_r, &seg.b_f, &seg.q_real,
                  &seg.q_fake}) {
    v->reserve(static_cast<std::size_t>(len));
  }
  for (std::int64_t t = begin; t <= end; ++t) {
    // Cap fake services at the available fake backlog, then zero them out
    // by folding the served amount into reduced fake arrivals. Drops keep
    // flowing into the fake side unchanged.
    const Count capped_fake_service = std::min(trace.q_fake(t, node), trace.b_f(t, node));
    const Count drops = trace.a_r(t, node) - trace.a_r_adm(t, node);
    const Count new_a_f = trace.a_f(t, node) - capped_fake_service;
    if (new_a_f < 0) {
      throw std::logic_error("transform_path_nondecreasing: fake arrivals went negative at slot " +
                             std::to_string(t));
    }
    seg.a_r.push_back(trace.a_r(t, node));
    seg.a_f.push_back(new_a_f);
    seg.a_r_adm.push_back(trace.a_r_adm(t, node));
    seg.a_f_adm.push_back(new_a_f + drops);
    seg.b_r.push_back(trace.b_r(t, node));
    seg.b_f.push_back(0);
    seg.q_real.push_back(trace.q_real(t, node));
    seg.q_fake.push_back(trace.q_fake(t, node));
  }
  seg.q_real_after = trace.q_real(end + 1, node);
  seg.q_fake_after = trace.q_fake(end + 1, node);
  return seg;
}

std::optional<std::string> replay_segment(const TransformedSegment& segment, Count buffer) {
  Count q_r = segment.q_real.empty() ? 0 : segment.q_real.front();
  Count q_f = segment.q_fake.empty() ? 0 : segment.q_fake.front();
  for (std::int64_t i = 0; i < segment.length(); ++i) {
    const std::size_t u = static_cast<std::size_t>(i);
    auto mismatch = [&](const char* field, Count got, Count expected) {
      std::ostringstream msg;
      msg << "slot " << (segment.begin + i) << " field " << field << ": replay " << got
          << " != recorded " << expected;
      return msg.str();
    };
    if (q_r != segment.q_real[u]) return mismatch("q_real", q_r, segment.q_real[u]);
    if (q_f != segment.q_fake[u]) return mismatch("q_fake", q_f, segment.q_fake[u]);
    const Count services = segment.b_r[u] + segment.b_f[u];
    const ServiceSplit split = split_services(q_r, services);
    if (split.real != segment.b_r[u]) return mismatch("b_r", split.real, segment.b_r[u]);
    if (split.fake != segment.b_f[u]) return mismatch("b_f", split.fake, segment.b_f[u]);
    const AdmitResult admit = admit_arrivals(q_r, buffer, segment.a_r[u], segment.a_f[u]);
    if (admit.admitted_real != segment.a_r_adm[u]) {
      return mismatch("a_r_adm", admit.admitted_real, segment.a_r_adm[u]);
    }
    if (admit.admitted_fake != segment.a_f_adm[u]) {
      return mismatch("a_f_adm", admit.admitted_fake, segment.a_f_adm[u]);
    }
    q_r = q_r - split.real + admit.admitted_real;
    q_f = std::max<Count>(q_f - split.fake, 0) + admit.admitted_fake;
  }
  if (q_r != segment.q_real_after) {
    return "final q_real mismatch: replay " + std::to_string(q_r) + " != recorded " +
           std::to_string(segment.q_real_after);
  }
  if (q_f != segment.q_fake_after) {
    return "final q_fake mismatch: replay " + std::to_string(q_f) + " != recorded " +
           std::to_string(segment.q_fake_after);
  }
  return std::nullopt;
}

std::optional<std::string> verify_trace_replay(const Trace& trace) {
  for (int n = 1; n <= trace.node_count(); ++n) {
    Count q_r = trace.q_real(0, n);
    Count q_f = trace.q_fake(0, n);
    for (std::int64_t t = 0; t < trace.slot_count(); ++t) {
      auto mismatch = [&](const char* field, Count got, Count expected) {
        std::ostringstream msg;
        msg << "node " << n << " slot " << t << " field " << field << ": replay " << got
            << " != recorded " << expected;
        return std::optional<std::string>(msg.str());
      };
      if (q_r != trace.q_real(t, n)) return mismatch("q_real", q_r, trace.q_real(t, n));
      if (q_f != trace.q_fake(t, n)) return mismatch("q_fake", q_f, trace.q_fake(t, n));
      const Count services = trace.b_r(t, n) + trace.b_f(t, n);
      const ServiceSplit split = split_services(q_r, services);
      if (split.real != trace.b_r(t, n)) return mismatch("b_r", split.real, trace.b_r(t, n));
      const AdmitResult admit = admit_arrivals(q_r, trace.buffer_size(), trace.a_r(t, n),
                                               trace.a_f(t, n));
      if (admit.admitted_real != trace.a_r_adm(t, n)) {
        return mismatch("a_r_adm", admit.admitted_real, trace.a_r_adm(t, n));
      }
      if (admit.admitted_fake != trace.a_f_adm(t, n)) {
        return mismatch("a_f_adm", admit.admitted_fake, trace.a_f_adm(t, n));
      }
      q_r = q_r - split.real + admit.admitted_real;
      q_f = std::max<Count>(q_f - split.fake, 0) + admit.admitted_fake;
    }
    if (q_r != trace.q_real(trace.slot_count(), n) ||
        q_f != trace.q_fake(trace.slot_count(), n)) {
      return "node " + std::to_string(n) + ": final backlog mismatch";
    }
  }
  return std::nullopt;
}

IntervalCheckReport verify_interval_dominance(const Trace& trace,
                                              const IntervalPartition& partition,
                                              const LowerBoundTrace& lower, Count delta_max) {
  const int node = partition.node;
  IntervalCheckReport report;
  report.node = node;
  auto violate = [&report](std::string check, std::int64_t k, std::int64_t j, std::int64_t slot,
                           std::string detail) {
    report.violations.push_back(
        {std::move(check), k, j, slot, std::move(detail)});
  };

  std::vector<std::uint8_t> is_pre(partition.in_low.size(), 0);
  for (std::int64_t t : partition.pre_slots) {
    is_pre[static_cast<std::size_t>(t - partition.begin)] = 1;
  }
  auto in_low = [&](std::int64_t t) {
    return partition.in_low[static_cast<std::size_t>(t - partition.begin)] != 0;
  };
  auto pre = [&](std::int64_t t) { return is_pre[static_cast<std::size_t>(t - partition.begin)] != 0; };

  // High-set and low-set dominance.
  Count high_lhs = 0, high_rhs = 0, low_lhs = 0, low_rhs = 0;
  for (std::int64_t t = partition.begin; t <= partition.end; ++t) {
    const Count adm = trace.a_r_adm(t, node);
    const Count hat = lower.a_r_hat_at(t, node);
    if (in_low(t) || pre(t)) {
      low_lhs += adm;
      low_rhs += hat;
    } else {
      high_lhs += adm;
      high_rhs += hat;
    }
  }
  if (high_lhs < high_rhs) {
    violate("high_set_dominance", 0, 0, partition.begin,
            "sum " + std::to_string(high_lhs) + " < " + std::to_string(high_rhs));
  }
  const bool starts_empty = trace.q_real(partition.begin, node) == 0;
  report.low_set_slack_applied = !starts_empty;
  const Count slack = starts_empty ? 0 : trace.buffer_size();
  if (low_lhs < low_rhs - slack) {
    violate("low_set_dominance", 0, 0, partition.begin,
            "sum " + std::to_string(low_lhs) + " < " + std::to_string(low_rhs) + " - slack " +
                std::to_string(slack));
  }

  // Local-minimum properties and per-interval dominance.
  const double band_lo = partition.threshold + static_cast<double>(delta_max);
  for (std::size_t ki = 0; ki < partition.intervals.size(); ++ki) {
    const LowInterval& interval = partition.intervals[ki];
    const std::int64_t k = static_cast<std::int64_t>(ki) + 1;
    for (std::size_t ji = 0; ji < interval.extrema.size(); ++ji) {
      const LocalExtremum& ex = interval.extrema[ji];
      const std::int64_t j = static_cast<std::int64_t>(ji) + 1;
      if (!ex.genuine_minimum) {
        ++report.clamped_minima;
        continue;
      }
      ++report.genuine_minima;
      if (ex.t_minus - 1 >= partition.begin) {
        const Count qr = trace.q_real(ex.t_minus, node);
        const Count prev_ar = trace.a_r(ex.t_minus - 1, node);
        if (qr != prev_ar) {
          violate("local_min_real_backlog", k, j, ex.t_minus,
                  "q_real " + std::to_string(qr) + " != previous real arrivals " +
                      std::to_string(prev_ar));
        }
        if (lower.a_r_hat_at(ex.t_minus - 1, node) != 0) {
          violate("local_min_counted_admission", k, j, ex.t_minus - 1,
                  "counting policy admitted before a local minimum");
        }
        if (static_cast<double>(trace.q_fake(ex.t_minus - 1, node)) >= band_lo) {
          violate("local_min_fake_before", k, j, ex.t_minus - 1,
                  "fake backlog not below band floor before the minimum");
        }
      }
      if (ex.t_plus + 1 <= partition.end) {
        if (static_cast<double>(trace.q_fake(ex.t_plus + 1, node)) >= band_lo) {
          violate("local_max_fake_after", k, j, ex.t_plus + 1,
                  "fake backlog not below band floor after the maximum");
        }
      }
      if (ex.t_minus - 1 >= partition.begin) {
        Count lhs = 0, rhs = 0;
        for (std::int64_t t = ex.t_minus - 1; t <= ex.t_plus; ++t) {
          lhs += trace.a_r_adm(t, node);
          rhs += lower.a_r_hat_at(t, node);
        }
        if (lhs < rhs) {
          violate("interval_dominance", k, j, ex.t_minus - 1,
                  "sum " + std::to_string(lhs) + " < " + std::to_string(rhs));
        }
      }
    }
  }
  return report;
}

std::vector<IntervalCheckReport> verify_interval_dominance_all(const Trace& trace,
                                                               std::span<const double> gamma,
                                                               Count buffer, Count delta_max) {
  LowerBoundTrace lower = lower_bound_admissions(trace, gamma, buffer, delta_max);
  std::vector<IntervalCheckReport> reports;
  reports.reserve(static_cast<std::size_t>(trace.node_count()));
  for (int n = 1; n <= trace.node_count(); ++n) {
    IntervalPartition part =
        partition_intervals(trace, n, gamma, buffer, 0, trace.slot_count() - 1);
    reports.push_back(verify_interval_dominance(trace, part, lower, delta_max));
  }
  return reports;
}

std::vector<std::pair<std::int64_t, std::int64_t>> nondecreasing_segments(
    const Trace& trace, int node, std::int64_t min_length) {
  std::vector<std::pair<std::int64_t, std::int64_t>> segments;
  std::int64_t start = 0;
  // A segment [s, e] qualifies when every transition s..e+1 is non-decreasing.
  for (std::int64_t t = 0; t < trace.slot_count(); ++t) {
    if (trace.q_fake(t + 1, node) < trace.q_fake(t, node)) {
      if (t - start >= min_length) segments.emplace_back(start, t - 1);
      start = t + 1;
    }
  }
  if (trace.slot_count() - start >= min_length) {
    segments.emplace_back(start, trace.slot_count() - 1);
  }
  return segments;
}

MetricsReport compute_metrics(const Trace& trace, std::int64_t burn_in, Count buffer,
                              double penalty_per_drop, std::span<const double> gamma,
                              Count max_radius) {
  if (burn_in < 0 || burn_in >= trace.slot_count()) {
    throw ValidationError("compute_metrics: trace length " + std::to_string(trace.slot_count()) +
                          " does not exceed burn-in " + std::to_string(burn_in));
  }
  MetricsReport report;
  const std::int64_t T = trace.slot_count() - burn_in;
  report.measured_slots = T;
  report.nodes.assign(static_cast<std::size_t>(trace.node_count()) + 1, NodeMetrics{});

  double cost_sum = 0.0;
  std::vector<Count> drops(static_cast<std::size_t>(trace.node_count()) + 1, 0);
  std::vector<Count> a_r(static_cast<std::size_t>(trace.node_count()) + 1, 0);
  std::vector<Count> a(static_cast<std::size_t>(trace.node_count()) + 1, 0);
  std::vector<Count> a_r_adm(static_cast<std::size_t>(trace.node_count()) + 1, 0);
  for (std::int64_t t = burn_in; t < trace.slot_count(); ++t) {
    cost_sum += trace.cost(t);
    for (int n = 1; n <= trace.node_count(); ++n) {
      drops[static_cast<std::size_t>(n)] += trace.drops(t, n);
      a_r[static_cast<std::size_t>(n)] += trace.a_r(t, n);
      a[static_cast<std::size_t>(n)] += trace.a_r(t, n) + trace.a_f(t, n);
      a_r_adm[static_cast<std::size_t>(n)] += trace.a_r_adm(t, n);
    }
  }
  report.avg_cost = cost_sum / static_cast<double>(T);
  Count total_drops = 0;
  for (int n = 1; n <= trace.node_count(); ++n) {
    auto& node = report.nodes[static_cast<std::size_t>(n)];
    node.avg_drops = static_cast<double>(drops[static_cast<std::size_t>(n)]) / static_cast<double>(T);
    node.avg_real_arrivals =
        static_cast<double>(a_r[static_cast<std::size_t>(n)]) / static_cast<double>(T);
    node.avg_arrivals = static_cast<double>(a[static_cast<std::size_t>(n)]) / static_cast<double>(T);
    node.avg_admitted_real =
        static_cast<double>(a_r_adm[static_cast<std::size_t>(n)]) / static_cast<double>(T);
    node.delay_finite = node.avg_admitted_real > 0.0;
    node.per_hop_delay = node.delay_finite
                             ? static_cast<double>(buffer) / node.avg_admitted_real
                             : std::numeric_limits<double>::infinity();
    total_drops += drops[static_cast<std::size_t>(n)];
  }
  report.avg_cost_with_drop_penalty =
      report.avg_cost + penalty_per_drop * static_cast<double>(total_drops) / static_cast<double>(T);

  if (!gamma.empty()) {
    if (static_cast<int>(gamma.size()) != trace.node_count()) {
      throw ValidationError("compute_metrics: gamma length mismatch");
    }
    const Count radius_cap = max_radius >= 0 ? max_radius : buffer;
    // The slot exceeds integer radius r exactly when r < max_n |Q_n - gamma_n|,
    // so a histogram of the largest exceeded radius plus a suffix sum gives
    // every tail frequency in one pass.
    std::vector<std::int64_t> histogram(static_cast<std::size_t>(radius_cap) + 2, 0);
    for (std::int64_t t = burn_in; t < trace.slot_count(); ++t) {
      double max_dev = 0.0;
      for (int n = 1; n <= trace.node_count(); ++n) {
        max_dev = std::max(max_dev, std::abs(static_cast<double>(trace.q_total(t, n)) -
                                             gamma[static_cast<std::size_t>(n - 1)]));
      }
      if (max_dev <= 0.0) continue;
      const Count largest = static_cast<Count>(std::ceil(max_dev)) - 1;
      if (largest < 0) continue;
      ++histogram[static_cast<std::size_t>(std::min(largest, radius_cap))];
    }
    std::int64_t running = 0;
    std::vector<std::int64_t> exceed(static_cast<std::size_t>(radius_cap) + 1, 0);
    for (Count r = radius_cap; r >= 0; --r) {
      running += histogram[static_cast<std::size_t>(r)];
      exceed[static_cast<std::size_t>(r)] = running;
    }
    for (Count r = 0; r <= radius_cap; ++r) {
      report.deviation_tail.emplace_back(
          static_cast<double>(r),
          static_cast<double>(exceed[static_cast<std::size_t>(r)]) / static_cast<double>(T));
    }
  }
  return report;
}

}  // namespace floatnet

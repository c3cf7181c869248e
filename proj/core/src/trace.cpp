#include "floatnet/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace floatnet {

namespace {

std::int32_t narrow(Count v, const char* what) {
  if (v < INT32_MIN || v > INT32_MAX) {
    throw std::logic_error(std::string("trace field overflow: ") + what);
  }
  return static_cast<std::int32_t>(v);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
  return std::string(buf, ptr);
}

}  // namespace

Trace::Trace(int node_count, Count buffer_size)
    : node_count_(node_count),
      buffer_size_(buffer_size),
      final_q_real_(static_cast<std::size_t>(node_count), 0),
      final_q_fake_(static_cast<std::size_t>(node_count), 0) {}

void Trace::reserve(std::int64_t slots) {
  const std::size_t cells = static_cast<std::size_t>(slots) * node_count_;
  for (auto* v : {&a_r_, &a_f_, &a_r_adm_, &a_f_adm_, &b_r_, &b_f_, &q_real_, &q_fake_}) {
    v->reserve(cells);
  }
  state_id_.reserve(static_cast<std::size_t>(slots));
  action_id_.reserve(static_cast<std::size_t>(slots));
  cost_.reserve(static_cast<std::size_t>(slots));
}

void Trace::push_slot(int state_id, int action_id, double cost,
                      const std::vector<NodeFlows>& flows,
                      const std::vector<Count>& q_real_before,
                      const std::vector<Count>& q_fake_before) {
  state_id_.push_back(state_id);
  action_id_.push_back(action_id);
  cost_.push_back(cost);
  for (int n = 1; n <= node_count_; ++n) {
    const NodeFlows& f = flows[static_cast<std::size_t>(n)];
    a_r_.push_back(narrow(f.a_r, "a_r"));
    a_f_.push_back(narrow(f.a_f, "a_f"));
    a_r_adm_.push_back(narrow(f.a_r_adm, "a_r_adm"));
    a_f_adm_.push_back(narrow(f.a_f_adm, "a_f_adm"));
    b_r_.push_back(narrow(f.b_r, "b_r"));
    b_f_.push_back(narrow(f.b_f, "b_f"));
    const Count qr = q_real_before[static_cast<std::size_t>(n)];
    const Count qf = q_fake_before[static_cast<std::size_t>(n)];
    q_real_.push_back(narrow(qr, "q_real"));
    q_fake_.push_back(narrow(qf, "q_fake"));
    final_q_real_[static_cast<std::size_t>(n - 1)] = narrow(qr - f.b_r + f.a_r_adm, "q_real");
    final_q_fake_[static_cast<std::size_t>(n - 1)] =
        narrow(std::max<Count>(qf - f.b_f, 0) + f.a_f_adm, "q_fake");
  }
}

Count Trace::q_real(std::int64_t t, int n) const {
  if (t == slot_count()) return final_q_real_[static_cast<std::size_t>(n - 1)];
  return q_real_[idx(t, n)];
}

Count Trace::q_fake(std::int64_t t, int n) const {
  if (t == slot_count()) return final_q_fake_[static_cast<std::size_t>(n - 1)];
  return q_fake_[idx(t, n)];
}

void write_trace(const Trace& trace, std::ostream& out) {
  out << "t,n,state,action,a_r,a_f,a_r_adm,a_f_adm,b_r,b_f,q_real,q_fake,cost,drops\n";
  const std::string newline = "\n";
  for (std::int64_t t = 0; t < trace.slot_count(); ++t) {
    const std::string cost = format_double(trace.cost(t));
    for (int n = 1; n <= trace.node_count(); ++n) {
      out << t << ',' << n << ',' << trace.state_id(t) << ',' << trace.action_id(t) << ','
          << trace.a_r(t, n) << ',' << trace.a_f(t, n) << ',' << trace.a_r_adm(t, n) << ','
          << trace.a_f_adm(t, n) << ',' << trace.b_r(t, n) << ',' << trace.b_f(t, n) << ','
          << trace.q_real(t, n) << ',' << trace.q_fake(t, n) << ',' << cost << ','
          << trace.drops(t, n) << newline;
    }
  }
}

void write_trace_file(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write trace file: " + path);
  write_trace(trace, out);
}

Trace read_trace(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(origin + ": empty trace file");
  const std::string expected_header =
      "t,n,state,action,a_r,a_f,a_r_adm,a_f_adm,b_r,b_f,q_real,q_fake,cost,drops";
  if (line != expected_header) {
    throw ValidationError(origin + ": unexpected trace header: " + line);
  }

  struct Row {
    std::int64_t t;
    int n;
    int state, action;
    Count a_r, a_f, a_r_adm, a_f_adm, b_r, b_f, q_real, q_fake, drops;
    double cost;
  };
  std::vector<Row> rows;
  std::int64_t line_no = 1;
  int max_node = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Row row;
    std::istringstream fields(line);
    std::string field;
    auto next_field = [&]() {
      if (!std::getline(fields, field, ',')) {
        throw ValidationError(origin + ":" + std::to_string(line_no) + ": too few columns");
      }
      return field;
    };
    try {
      row.t = std::stoll(next_field());
      row.n = std::stoi(next_field());
      row.state = std::stoi(next_field());
      row.action = std::stoi(next_field());
      row.a_r = std::stoll(next_field());
      row.a_f = std::stoll(next_field());
      row.a_r_adm = std::stoll(next_field());
      row.a_f_adm = std::stoll(next_field());
      row.b_r = std::stoll(next_field());
      row.b_f = std::stoll(next_field());
      row.q_real = std::stoll(next_field());
      row.q_fake = std::stoll(next_field());
      row.cost = std::stod(next_field());
      row.drops = std::stoll(next_field());
    } catch (const std::invalid_argument&) {
      throw ValidationError(origin + ":" + std::to_string(line_no) + ": malformed field");
    } catch (const std::out_of_range&) {
      throw ValidationError(origin + ":" + std::to_string(line_no) + ": field out of range");
    }
    max_node = std::max(max_node, row.n);
    rows.push_back(row);
  }
  if (rows.empty()) throw ValidationError(origin + ": trace has no rows");
  if (max_node < 1) throw ValidationError(origin + ": no node rows found");

  Trace trace(max_node, 0);
  const std::int64_t slots = static_cast<std::int64_t>(rows.size()) / max_node;
  if (slots * max_node != static_cast<std::int64_t>(rows.size())) {
    throw ValidationError(origin + ": row count is not a multiple of the node count");
  }
  trace.reserve(slots);
  std::vector<NodeFlows> flows(static_cast<std::size_t>(max_node) + 1);
  std::vector<Count> q_real(static_cast<std::size_t>(max_node) + 1, 0);
  std::vector<Count> q_fake(static_cast<std::size_t>(max_node) + 1, 0);
  for (std::int64_t t = 0; t < slots; ++t) {
    for (int n = 1; n <= max_node; ++n) {
      const Row& row = rows[static_cast<std::size_t>(t) * max_node + (n - 1)];
      if (row.t != t || row.n != n) {
        throw ValidationError(origin + ": rows out of order near slot " + std::to_string(t) +
                              " node " + std::to_string(n));
      }
      NodeFlows& f = flows[static_cast<std::size_t>(n)];
      f.a_r = row.a_r;
      f.a_f = row.a_f;
      f.a_r_adm = row.a_r_adm;
      f.a_f_adm = row.a_f_adm;
      f.b_r = row.b_r;
      f.b_f = row.b_f;
      f.drops = row.drops;
      q_real[static_cast<std::size_t>(n)] = row.q_real;
      q_fake[static_cast<std::size_t>(n)] = row.q_fake;
    }
    const Row& first = rows[static_cast<std::size_t>(t) * max_node];
    trace.push_slot(first.state, first.action, first.cost, flows, q_real, q_fake);
  }
  return trace;
}

Trace read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open trace file: " + path);
  return read_trace(in, path);
}

}  // namespace floatnet

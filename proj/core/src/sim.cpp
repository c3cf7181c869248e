#include "floatnet/sim.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace floatnet {

namespace {

std::int64_t effective_burn_in(const RunConfig& config) {
  if (config.burn_in >= 0) return config.burn_in;
  return static_cast<std::int64_t>(std::llround(10.0 * config.v_param));
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
  return std::string(buf, ptr);
}

}  // namespace

RunResult run(const RunConfig& config, const Scenario& scenario) {
  const ValidationReport validation = validate_scenario(scenario);
  if (!validation.ok()) {
    throw ValidationError("invalid scenario: " + validation.violations.front().message);
  }
  const std::int64_t burn_in = effective_burn_in(config);
  if (config.horizon <= burn_in) {
    throw ValidationError("empty measurement window: horizon " + std::to_string(config.horizon) +
                          " does not exceed burn-in " + std::to_string(burn_in));
  }
  const bool with_floating = config.mode != RunMode::standard;
  const bool with_standard = config.mode != RunMode::floating;
  const Count delta_max = compute_delta_max(scenario).delta_max;
  if (with_floating && config.buffer_size < 1) {
    throw ValidationError("floating mode needs a positive buffer size");
  }
  if (config.record_trace && !with_floating) {
    throw ValidationError("trace recording needs a floating-queue run");
  }

  const int n_nodes = scenario.node_count;
  const int dim = n_nodes + 1;

  std::vector<double> probabilities;
  probabilities.reserve(scenario.states.size());
  for (const auto& state : scenario.states) probabilities.push_back(state.probability);
  const CategoricalSampler sampler(probabilities);
  Xoshiro256PlusPlus rng(config.seed);

  std::vector<Count> standard_q(static_cast<std::size_t>(dim), 0);
  FloatingQueueState floating(n_nodes, config.buffer_size);
  if (!config.fake_init.empty()) {
    if (static_cast<int>(config.fake_init.size()) != n_nodes) {
      throw ValidationError("fake_init length does not match the node count");
    }
    for (int n = 1; n <= n_nodes; ++n) {
      const Count q = config.fake_init[static_cast<std::size_t>(n - 1)];
      if (q < 0) throw ValidationError("fake_init entries must be nonnegative");
      floating.fake[static_cast<std::size_t>(n)] = q;
    }
    // Matched initial conditions keep both implementations in lockstep.
    if (with_standard) {
      for (int n = 1; n <= n_nodes; ++n) {
        standard_q[static_cast<std::size_t>(n)] = floating.fake[static_cast<std::size_t>(n)];
      }
    }
  }

  const ControllerConfig controller{config.v_param, TieBreak::lowest_action_id};
  RunResult result;
  result.diagnostics.drop_growth_applicable =
      with_floating && config.buffer_size >= 2 * delta_max;
  if (config.record_trace) {
    result.trace.emplace(n_nodes, config.buffer_size);
    result.trace->reserve(config.horizon);
  }

  // Scratch buffers reused across slots.
  std::vector<Count> total_q(static_cast<std::size_t>(n_nodes), 0);
  std::vector<Count> fake_before(static_cast<std::size_t>(dim), 0);
  std::vector<Count> real_before(static_cast<std::size_t>(dim), 0);

  double cost_sum = 0.0;
  double penalized_cost_sum = 0.0;
  double throughput_sum = 0.0;
  std::vector<Count> drops_sum(static_cast<std::size_t>(dim), 0);
  std::vector<Count> a_r_sum(static_cast<std::size_t>(dim), 0);
  std::vector<Count> a_sum(static_cast<std::size_t>(dim), 0);
  std::vector<Count> a_r_adm_sum(static_cast<std::size_t>(dim), 0);
  std::int64_t measured = 0;

  for (std::int64_t t = 0; t < config.horizon; ++t) {
    const int state_id = sampler.sample(rng);
    const NetworkState& state = scenario.states[static_cast<std::size_t>(state_id)];

    int floating_action = -1;
    int standard_action = -1;
    double slot_cost = 0.0;
    if (with_floating) {
      for (int n = 1; n <= n_nodes; ++n) {
        total_q[static_cast<std::size_t>(n - 1)] = floating.real[static_cast<std::size_t>(n)] +
                                                   floating.fake[static_cast<std::size_t>(n)];
      }
      floating_action = decide_index(state, total_q, controller).action_id;
    }
    if (with_standard) {
      standard_action =
          decide_index(state, std::span<const Count>(standard_q).subspan(1), controller).action_id;
    }
    if (config.mode == RunMode::both && floating_action != standard_action) {
      ++result.diagnostics.decision_mismatches;
    }

    const bool measure = t >= burn_in;
    if (with_floating) {
      const ActionSpec& action = state.actions[static_cast<std::size_t>(floating_action)];
      slot_cost = action.cost;
      std::copy(floating.real.begin(), floating.real.end(), real_before.begin());
      std::copy(floating.fake.begin(), floating.fake.end(), fake_before.begin());
      const FlowSplit split = step_floating_network(floating, action.services);

      Count slot_drops = 0;
      for (int n = 1; n <= n_nodes; ++n) {
        const NodeFlows& f = split.node[static_cast<std::size_t>(n)];
        slot_drops += f.drops;
        if (f.drops > 0) {
          ++result.diagnostics.drop_growth_checked;
          if (floating.fake[static_cast<std::size_t>(n)] <=
              fake_before[static_cast<std::size_t>(n)]) {
            ++result.diagnostics.drop_growth_violations;
          }
        }
      }
      if (measure) {
        cost_sum += slot_cost;
        penalized_cost_sum +=
            slot_cost + scenario.penalty_per_drop * static_cast<double>(slot_drops);
        Count exits = 0;
        Count total_backlog = 0;
        for (int n = 1; n <= n_nodes; ++n) {
          const NodeFlows& f = split.node[static_cast<std::size_t>(n)];
          exits += split.mu_real.at(n, 0);
          drops_sum[static_cast<std::size_t>(n)] += f.drops;
          a_r_sum[static_cast<std::size_t>(n)] += f.a_r;
          a_sum[static_cast<std::size_t>(n)] += f.a_r + f.a_f;
          a_r_adm_sum[static_cast<std::size_t>(n)] += f.a_r_adm;
          total_backlog += floating.real[static_cast<std::size_t>(n)] +
                           floating.fake[static_cast<std::size_t>(n)];
        }
        throughput_sum += static_cast<double>(exits);
        result.diagnostics.max_total_backlog =
            std::max(result.diagnostics.max_total_backlog, total_backlog);
      }
      if (result.trace) {
        result.trace->push_slot(state_id, floating_action, slot_cost, split.node, real_before,
                                fake_before);
      }
    }
    if (with_standard) {
      const ActionSpec& action = state.actions[static_cast<std::size_t>(standard_action)];
      if (!with_floating) slot_cost = action.cost;
      for (int n = 1; n <= n_nodes; ++n) {
        standard_q[static_cast<std::size_t>(n)] =
            standard_update(standard_q[static_cast<std::size_t>(n)], action.inflow[n],
                            action.outflow[n]);
      }
      if (!with_floating && measure) {
        cost_sum += slot_cost;
        penalized_cost_sum += slot_cost;
        Count exits = 0;
        Count total_backlog = 0;
        for (int n = 1; n <= n_nodes; ++n) {
          exits += action.services.at(n, 0);
          a_sum[static_cast<std::size_t>(n)] += action.inflow[n];
          total_backlog += standard_q[static_cast<std::size_t>(n)];
        }
        throughput_sum += static_cast<double>(exits);
        result.diagnostics.max_total_backlog =
            std::max(result.diagnostics.max_total_backlog, total_backlog);
      }
    }
    if (measure) ++measured;
  }

  MetricsReport& metrics = result.metrics;
  metrics.measured_slots = measured;
  metrics.avg_cost = cost_sum / static_cast<double>(measured);
  metrics.avg_cost_with_drop_penalty = penalized_cost_sum / static_cast<double>(measured);
  metrics.total_throughput = throughput_sum / static_cast<double>(measured);
  metrics.nodes.assign(static_cast<std::size_t>(dim), NodeMetrics{});
  for (int n = 1; n <= n_nodes; ++n) {
    NodeMetrics& node = metrics.nodes[static_cast<std::size_t>(n)];
    node.avg_drops =
        static_cast<double>(drops_sum[static_cast<std::size_t>(n)]) / static_cast<double>(measured);
    node.avg_real_arrivals =
        static_cast<double>(a_r_sum[static_cast<std::size_t>(n)]) / static_cast<double>(measured);
    node.avg_arrivals =
        static_cast<double>(a_sum[static_cast<std::size_t>(n)]) / static_cast<double>(measured);
    node.avg_admitted_real = static_cast<double>(a_r_adm_sum[static_cast<std::size_t>(n)]) /
                             static_cast<double>(measured);
    node.delay_finite = with_floating && node.avg_admitted_real > 0.0;
    node.per_hop_delay = node.delay_finite
                             ? static_cast<double>(config.buffer_size) / node.avg_admitted_real
                             : std::numeric_limits<double>::infinity();
  }
  return result;
}

std::vector<double> parse_value_list(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream stream(text);
  std::string token;
  while (std::getline(stream, token, ',')) tokens.push_back(token);
  if (tokens.empty()) throw ValidationError("empty value list");

  bool ellipsis = false;
  std::vector<double> values;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == "...") {
      if (i + 1 != tokens.size() - 1 || values.size() < 2) {
        throw ValidationError("'...' needs two leading values and one trailing value");
      }
      ellipsis = true;
      continue;
    }
    try {
      std::size_t pos = 0;
      values.push_back(std::stod(tokens[i], &pos));
      if (pos != tokens[i].size()) throw std::invalid_argument(tokens[i]);
    } catch (const std::exception&) {
      throw ValidationError("malformed value: '" + tokens[i] + "'");
    }
  }
  if (ellipsis) {
    const double last = values.back();
    values.pop_back();
    const double step = values[values.size() - 1] - values[values.size() - 2];
    if (step <= 0.0) throw ValidationError("'...' needs an increasing leading pair");
    for (double v = values.back() + step; v <= last + 1e-9; v += step) values.push_back(v);
    if (std::abs(values.back() - last) > 1e-9) {
      throw ValidationError("'...' progression does not reach the final value");
    }
  }
  return values;
}

std::string sweep(const SweepSpec& spec, const Scenario& scenario) {
  if (spec.values.empty()) throw ValidationError("sweep needs a nonempty value list");
  for (std::size_t i = 1; i < spec.values.size(); ++i) {
    if (spec.values[i] <= spec.values[i - 1]) {
      throw ValidationError("sweep values must be strictly increasing");
    }
  }
  if (spec.seeds_per_point < 1) throw ValidationError("sweep needs at least one seed per point");

  struct Row {
    double axis_value = 0.0;
    std::uint64_t seed = 0;
    MetricsReport metrics;
  };
  const std::size_t n_rows = spec.values.size() * static_cast<std::size_t>(spec.seeds_per_point);
  std::vector<Row> rows(n_rows);

  std::atomic<std::size_t> cursor{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    while (true) {
      const std::size_t row = cursor.fetch_add(1);
      if (row >= n_rows) break;
      try {
        const std::size_t value_index = row / static_cast<std::size_t>(spec.seeds_per_point);
        RunConfig config = spec.base;
        config.record_trace = false;
        if (spec.axis == SweepSpec::Axis::buffer_size) {
          config.buffer_size = static_cast<Count>(std::llround(spec.values[value_index]));
        } else {
          config.v_param = spec.values[value_index];
        }
        config.seed = substream_seed(spec.base.seed, row);
        rows[row].axis_value = spec.values[value_index];
        rows[row].seed = config.seed;
        rows[row].metrics = run(config, scenario).metrics;
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        break;
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_workers = std::min<std::size_t>(hw, n_rows);
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& thread : pool) thread.join();
  if (failure) std::rethrow_exception(failure);

  std::ostringstream out;
  out << "axis_value,seed,avg_cost";
  for (int n = 1; n <= scenario.node_count; ++n) out << ",delay_" << n;
  for (int n = 1; n <= scenario.node_count; ++n) out << ",drop_rate_" << n;
  out << ",throughput\n";
  for (const Row& row : rows) {
    out << format_double(row.axis_value) << ',' << row.seed << ','
        << format_double(row.metrics.avg_cost);
    for (int n = 1; n <= scenario.node_count; ++n) {
      out << ',' << format_double(row.metrics.nodes[static_cast<std::size_t>(n)].per_hop_delay);
    }
    for (int n = 1; n <= scenario.node_count; ++n) {
      out << ',' << format_double(row.metrics.nodes[static_cast<std::size_t>(n)].avg_drops);
    }
    out << ',' << format_double(row.metrics.total_throughput) << '\n';
  }
  return out.str();
}

Scenario build_line_network(double arrival_prob, double good_prob, LineVariant variant) {
  if (arrival_prob < 0.0 || arrival_prob > 1.0 || good_prob < 0.0 || good_prob > 1.0) {
    throw ValidationError("build_line_network: probabilities must lie in [0, 1]");
  }
  constexpr int kLinks = 4;
  Scenario scenario;
  scenario.node_count = kLinks;
  scenario.penalty_per_drop = variant == LineVariant::throughput_max ? 1.0 : 0.0;
  const int dim = kLinks + 1;

  // State id = arrival bit * 16 + channel mask; channel bit l-1 set means
  // link l (node l -> l+1, link 4 exits) is good.
  for (int arrival = 0; arrival <= 1; ++arrival) {
    for (int channels = 0; channels < (1 << kLinks); ++channels) {
      NetworkState state;
      state.id = arrival * (1 << kLinks) + channels;
      double prob = arrival == 1 ? arrival_prob : 1.0 - arrival_prob;
      for (int link = 0; link < kLinks; ++link) {
        prob *= (channels >> link) & 1 ? good_prob : 1.0 - good_prob;
      }
      state.probability = prob;

      auto add_action = [&](int transmit_mask, int admit) {
        ActionSpec action;
        action.id = static_cast<int>(state.actions.size());
        action.services = ServiceMatrix(dim);
        double cost = 0.0;
        if (variant == LineVariant::power_min) {
          action.services.at(0, 1) = arrival;  // exogenous arrivals always admitted
        } else {
          action.services.at(0, 1) = admit;
          cost -= static_cast<double>(admit);
        }
        for (int link = 0; link < kLinks; ++link) {
          if (!((transmit_mask >> link) & 1)) continue;
          const int from = link + 1;
          const int to = link + 1 == kLinks ? 0 : link + 2;
          action.services.at(from, to) = 1;
          if (variant == LineVariant::power_min) {
            cost += (channels >> link) & 1 ? 1.0 : 2.0;
          }
        }
        action.cost = cost;
        state.actions.push_back(std::move(action));
      };

      if (variant == LineVariant::power_min) {
        for (int mask = 0; mask < (1 << kLinks); ++mask) add_action(mask, 0);
      } else {
        // Transmissions are possible on good links only; admission is a
        // choice when an arrival is present.
        for (int admit = 0; admit <= arrival; ++admit) {
          for (int mask = 0; mask < (1 << kLinks); ++mask) {
            if ((mask & ~channels) != 0) continue;
            add_action(mask, admit);
          }
        }
      }
      scenario.states.push_back(std::move(state));
    }
  }
  scenario.finalize();
  return scenario;
}

Scenario random_scenario(Xoshiro256PlusPlus& rng, const RandomScenarioParams& params) {
  Scenario scenario;
  scenario.node_count = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(params.max_nodes)));
  const int dim = scenario.node_count + 1;
  const int n_states = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(params.max_states)));

  std::vector<double> raw(static_cast<std::size_t>(n_states));
  double total = 0.0;
  for (auto& p : raw) {
    p = rng.next_double() + 1e-3;
    total += p;
  }
  for (int m = 0; m < n_states; ++m) {
    NetworkState state;
    state.id = m;
    state.probability = raw[static_cast<std::size_t>(m)] / total;
    const int n_actions =
        1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(params.max_actions)));
    for (int k = 0; k < n_actions; ++k) {
      ActionSpec action;
      action.id = k;
      action.cost = rng.next_double() * 5.0;
      action.services = ServiceMatrix(dim);
      const int entries = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(2 * dim)));
      for (int e = 0; e < entries; ++e) {
        const int i = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(dim)));
        const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(dim)));
        if (i == j) continue;
        action.services.at(i, j) =
            rng.next_below(static_cast<std::uint64_t>(params.max_amount) + 1);
      }
      state.actions.push_back(std::move(action));
    }
    scenario.states.push_back(std::move(state));
  }
  // Exact normalization so the report's tolerance is met by construction.
  double acc = 0.0;
  for (int m = 0; m + 1 < n_states; ++m) acc += scenario.states[static_cast<std::size_t>(m)].probability;
  scenario.states.back().probability = 1.0 - acc;
  scenario.finalize();
  return scenario;
}

}  // namespace floatnet

#include <doctest.h>

#include <array>

#include "floatnet/controller.hpp"
#include "floatnet/rng.hpp"
#include "floatnet/sim.hpp"

using namespace floatnet;

namespace {

// Four nodes, two actions: idle, and transmit one packet on link 1 -> 2 at
// unit cost.
NetworkState single_link_state() {
  NetworkState state;
  state.probability = 1.0;
  ActionSpec idle;
  idle.id = 0;
  idle.services = ServiceMatrix(5);
  state.actions.push_back(idle);
  ActionSpec transmit;
  transmit.id = 1;
  transmit.cost = 1.0;
  transmit.services = ServiceMatrix(5);
  transmit.services.at(1, 2) = 1;
  state.actions.push_back(transmit);
  Scenario wrap;
  wrap.node_count = 4;
  wrap.states.push_back(state);
  wrap.finalize();
  return wrap.states[0];
}

}  // namespace

TEST_CASE("weight vanishes with zero V and zero backlog") {
  const NetworkState state = single_link_state();
  const std::array<Count, 4> zero{0, 0, 0, 0};
  const ControllerConfig config{0.0, TieBreak::lowest_action_id};
  CHECK(dpp_weight(state.actions[1], zero, config) == 0.0);
  CHECK(dpp_weight(state.actions[0], zero, config) == 0.0);
}

TEST_CASE("weight of a single-link transmission matches the hand evaluation") {
  const NetworkState state = single_link_state();
  const std::array<Count, 4> backlog{50, 10, 0, 0};
  const ControllerConfig config{200.0, TieBreak::lowest_action_id};
  CHECK(dpp_weight(state.actions[1], backlog, config) == 160.0);
  CHECK(dpp_weight(state.actions[0], backlog, config) == 0.0);
}

TEST_CASE("zero-V decisions drain the heavier queue") {
  const NetworkState state = single_link_state();
  const std::array<Count, 4> backlog{10, 0, 0, 0};
  const ControllerConfig config{0.0, TieBreak::lowest_action_id};
  const Decision decision = decide(state, backlog, config);
  CHECK(decision.action_id == 1);
  CHECK(decision.objective_value == -10.0);
  CHECK(decision.flows.services[0] == 1);
  CHECK(decision.flows.arrivals[1] == 1);
}

TEST_CASE("ties go to the lowest action id") {
  NetworkState state;
  state.probability = 1.0;
  for (int k = 0; k < 2; ++k) {
    ActionSpec action;
    action.id = k;
    action.cost = 1.0;
    action.services = ServiceMatrix(2);
    state.actions.push_back(action);
  }
  Scenario wrap;
  wrap.node_count = 1;
  wrap.states.push_back(state);
  wrap.finalize();
  const std::array<Count, 1> backlog{5};
  const Decision decision = decide(wrap.states[0], backlog, {1.0, TieBreak::lowest_action_id});
  CHECK(decision.action_id == 0);
}

TEST_CASE("transmission wins exactly when the backlog crosses V times the cost") {
  const NetworkState state = single_link_state();
  const ControllerConfig config{200.0, TieBreak::lowest_action_id};
  const std::array<Count, 4> below{200, 0, 0, 0};  // weight 200 - 200 = 0, tie -> idle
  CHECK(decide(state, below, config).action_id == 0);
  const std::array<Count, 4> above{201, 0, 0, 0};
  CHECK(decide(state, above, config).action_id == 1);
}

TEST_CASE("empty action sets are rejected") {
  NetworkState state;
  state.probability = 1.0;
  const std::array<Count, 1> backlog{0};
  CHECK_THROWS_AS(decide(state, backlog, {0.0, TieBreak::lowest_action_id}), ValidationError);
}

TEST_CASE("decide is deterministic and its objective is reproducible") {
  Xoshiro256PlusPlus rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const Scenario scenario = random_scenario(rng);
    std::vector<Count> backlog(static_cast<std::size_t>(scenario.node_count));
    for (auto& q : backlog) q = static_cast<Count>(rng.next_below(1000));
    const ControllerConfig config{static_cast<double>(rng.next_below(500)),
                                  TieBreak::lowest_action_id};
    for (const auto& state : scenario.states) {
      const Decision first = decide(state, backlog, config);
      const Decision second = decide(state, backlog, config);
      CHECK(first.action_id == second.action_id);
      CHECK(first.objective_value == second.objective_value);
      CHECK(first.objective_value ==
            dpp_weight(state.actions[static_cast<std::size_t>(first.action_id)], backlog, config));
    }
  }
}

TEST_CASE("scaling costs and backlogs by the same factor keeps the argmin") {
  Xoshiro256PlusPlus rng(123);
  for (int trial = 0; trial < 40; ++trial) {
    Scenario scenario = random_scenario(rng);
    std::vector<Count> backlog(static_cast<std::size_t>(scenario.node_count));
    // Multiples of four keep the scaled backlogs integral for every factor.
    for (auto& q : backlog) q = 4 * static_cast<Count>(rng.next_below(300));
    const double v = static_cast<double>(rng.next_below(100));
    const ControllerConfig config{v, TieBreak::lowest_action_id};

    for (const double factor : {0.5, 2.0, 4.0}) {
      Scenario scaled = scenario;
      for (auto& state : scaled.states) {
        for (auto& action : state.actions) action.cost *= factor;
      }
      scaled.finalize();
      std::vector<Count> scaled_backlog(backlog);
      for (auto& q : scaled_backlog) {
        q = static_cast<Count>(static_cast<double>(q) * factor);
      }
      for (std::size_t m = 0; m < scenario.states.size(); ++m) {
        const int base = decide(scenario.states[m], backlog, config).action_id;
        const int after = decide(scaled.states[m], scaled_backlog, config).action_id;
        CHECK(base == after);
      }
    }
  }
}

TEST_CASE("with V zero a nonempty queue never strictly prefers idling") {
  const NetworkState state = single_link_state();
  const ControllerConfig config{0.0, TieBreak::lowest_action_id};
  for (Count q = 1; q <= 64; q *= 2) {
    const std::array<Count, 4> backlog{q, 0, 0, 0};
    CHECK(decide(state, backlog, config).action_id == 1);
  }
}

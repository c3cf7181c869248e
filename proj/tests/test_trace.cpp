#include <doctest.h>

#include <sstream>

#include "floatnet/sim.hpp"
#include "floatnet/trace.hpp"
#include "support/oracles.hpp"

using namespace floatnet;

TEST_CASE("trace file round trip reproduces every field") {
  const Scenario scenario = build_line_network(0.92, 0.9, LineVariant::power_min);
  RunConfig config;
  config.v_param = 50.0;
  config.buffer_size = 8;
  config.horizon = 2000;
  config.burn_in = 0;
  config.seed = 3;
  config.record_trace = true;
  const RunResult result = run(config, scenario);
  REQUIRE(result.trace.has_value());

  std::ostringstream out;
  write_trace(*result.trace, out);
  std::istringstream in(out.str());
  Trace loaded = read_trace(in);
  loaded.set_buffer_size(config.buffer_size);
  CHECK(loaded == *result.trace);
}

TEST_CASE("trace writing is byte deterministic") {
  const std::vector<testing::SlotInput> slots{{1, 0, 0}, {0, 2, 1}, {3, 0, 2}};
  const Trace trace = testing::make_single_node_trace(slots, 4);
  std::ostringstream first, second;
  write_trace(trace, first);
  write_trace(trace, second);
  CHECK(first.str() == second.str());
  CHECK(first.str().starts_with(
      "t,n,state,action,a_r,a_f,a_r_adm,a_f_adm,b_r,b_f,q_real,q_fake,cost,drops\n"));
}

TEST_CASE("trace reader rejects malformed input") {
  std::istringstream empty("");
  CHECK_THROWS_AS(read_trace(empty), ValidationError);

  std::istringstream bad_header("time,node\n");
  CHECK_THROWS_AS(read_trace(bad_header), ValidationError);

  std::istringstream bad_row(
      "t,n,state,action,a_r,a_f,a_r_adm,a_f_adm,b_r,b_f,q_real,q_fake,cost,drops\n"
      "0,1,0,0,oops,0,0,0,0,0,0,0,0,0\n");
  CHECK_THROWS_AS(read_trace(bad_row), ValidationError);

  std::istringstream out_of_order(
      "t,n,state,action,a_r,a_f,a_r_adm,a_f_adm,b_r,b_f,q_real,q_fake,cost,drops\n"
      "0,2,0,0,0,0,0,0,0,0,0,0,0,0\n"
      "0,1,0,0,0,0,0,0,0,0,0,0,0,0\n");
  CHECK_THROWS_AS(read_trace(out_of_order), ValidationError);
}

TEST_CASE("final backlogs follow from the last slot") {
  const std::vector<testing::SlotInput> slots{{2, 0, 0}, {2, 1, 1}};
  const Trace trace = testing::make_single_node_trace(slots, 3);
  // Slot 0: admit 2 into an empty queue. Slot 1: serve 1 real, admit only
  // 1 of 2 (headroom test against the start-of-slot backlog), drop 1.
  CHECK(trace.q_real(1, 1) == 2);
  CHECK(trace.q_real(2, 1) == 2);
  CHECK(trace.q_fake(2, 1) == 2);
  CHECK(trace.drops(1, 1) == 1);
}

#include <doctest.h>

#include <cmath>

#include "bac/hierarchy.hpp"

using namespace bac;

namespace {

ExperimentConfig small_two_level(Architecture arch = Architecture::kTwoLevelIndirect) {
  ExperimentConfig c;
  c.architecture = arch;
  c.phase1 = {50, 2000};
  c.phase2 = {30, 3000};
  c.phase3 = {20, 2000};
  c.phase4 = {5, 3000};
  c.success_steps = 500;
  return c;
}

}  // namespace

TEST_CASE("explicit-role reinforcement") {
  auto r = [](double y, double th) {
    return ll_reinforcement_explicit({Vector::Constant(1, y), 0}, th);
  };
  CHECK(r(0.2, 0.2) == 0.0);
  CHECK(r(0.3, 0.1) == doctest::Approx(0.04));
  CHECK(r(0.3, -0.1) == r(-0.1, 0.3));
}

TEST_CASE("high-level schedule") {
  HierarchyConfig h;
  for (std::size_t s : {0u, 40u, 80u}) CHECK(hl_schedule(s, h));
  for (std::size_t s = 1; s < 40; ++s) CHECK_FALSE(hl_schedule(s, h));
  h.n_ratio = 10;
  CHECK_FALSE(hl_schedule(25, h));
  CHECK(hl_schedule(30, h));
  h.n_ratio = 1;
  CHECK_THROWS_AS(h.validate(), ConfigError);
}

TEST_CASE("low-level input layout") {
  Vector s(4);
  s << 0.1, 0.2, 0.3, 0.4;
  const Vector in = ll_input(s, {Vector::Constant(1, 0.0), 0});
  REQUIRE(in.size() == 5);
  CHECK(in.head(4) == s);
  CHECK(in(4) == 0.0);

  TwoLevelExperiment e(small_two_level(), 1);
  CHECK(e.ll().action_net().n_in() == 5);
  CHECK(e.ll().critic_net().n_in() == 5);
  CHECK(e.ll().model().net.n_in() == 5);
  CHECK(e.ll().model().net.n_out() == 4);
}

TEST_CASE("window collection") {
  PhysicsParams p;
  Bounds b;
  const PlanSignal zero{Vector::Constant(1, 0.0), 0};
  LowLevelPolicy still = [](const CartPoleState&, const PlanSignal&, std::size_t) { return 0.0; };
  const auto rest = hl_transition_collect(still, {}, zero, p, b,
                                          ReinforcementMode::kDistanceCost, 40);
  CHECK(rest.steps == 40);
  CHECK(rest.end == CartPoleState{});
  CHECK_FALSE(rest.truncated);

  // The window's end state is the simulator run step by step, and every step
  // sees the same plan.
  const PlanSignal plan{Vector::Constant(1, 0.17), 3};
  bool constant = true;
  LowLevelPolicy ll = [&](const CartPoleState& s, const PlanSignal& y, std::size_t) {
    constant = constant && y.y(0) == plan.y(0);
    return -0.5 * s.theta * 10 - 0.05 * s.x;
  };
  const CartPoleState start{0.1, 0.0, 0.02, 0.0};
  const auto tr = hl_transition_collect(ll, start, plan, p, b,
                                        ReinforcementMode::kDistanceCost, 40);
  CartPoleState s = start;
  double sum = 0.0;
  for (int k = 0; k < 40 && !is_failure(s, b); ++k) {
    s = step(s, -0.5 * s.theta * 10 - 0.05 * s.x, p);
    sum += reinforcement(s, b, ReinforcementMode::kDistanceCost);
  }
  CHECK(constant);
  CHECK(tr.end == s);
  CHECK(tr.reinforcement_accumulated == doctest::Approx(sum));
  CHECK(tr.reinforcement_sampled == reinforcement(s, b, ReinforcementMode::kDistanceCost));

  LowLevelPolicy push = [](const CartPoleState&, const PlanSignal&, std::size_t) { return 1.0; };
  const auto fell = hl_transition_collect(push, {}, zero, p, b,
                                          ReinforcementMode::kDistanceCost, 400);
  CHECK(fell.truncated);
  CHECK(fell.steps < 400);
  CHECK(fell.failure != FailureKind::kNone);
}

TEST_CASE("phase lists") {
  TwoLevelExperiment ind(small_two_level(), 1);
  CHECK(ind.phases().size() == 4);
  TwoLevelExperiment dir(small_two_level(Architecture::kTwoLevelDirect), 1);
  CHECK(dir.phases().size() == 2);
}

TEST_CASE("phases must run in order") {
  TwoLevelExperiment e(small_two_level(), 2);
  CHECK_THROWS(e.run_phase(PhaseId::kII));
}

TEST_CASE("zero budget fails immediately") {
  auto c = small_two_level();
  c.phase1 = {0, 0};
  TwoLevelExperiment e(c, 3);
  const auto rep = e.run_phase(PhaseId::kI);
  CHECK_FALSE(rep.converged);
  CHECK(rep.trials == 0);
  CHECK(rep.steps == 0);
  const auto res = run_two_level(c, 3);
  CHECK_FALSE(res.success);
  REQUIRE(res.phases.size() == 1);
}

TEST_CASE("frozen nets stay frozen") {
  auto c = small_two_level();
  c.model_error_threshold = 1.0;  // let phase I converge quickly
  TwoLevelExperiment e(c, 4);
  e.run_phase(PhaseId::kI);
  CHECK(e.ll().model_frozen);
  const NetworkWeights model = e.ll().model().net;
  e.run_phase(PhaseId::kII);
  CHECK(e.ll().model().net == model);
  CHECK(e.ll().action_frozen);
  const NetworkWeights action = e.ll().action_net();
  const NetworkWeights critic = e.ll().critic_net();
  e.run_phase(PhaseId::kIII);
  e.run_phase(PhaseId::kIV);
  CHECK(e.ll().action_net() == action);
  CHECK(e.ll().critic_net() == critic);
  CHECK(e.ll().model().net == model);
}

TEST_CASE("two-level runs are deterministic") {
  const auto c = small_two_level();
  const auto a = run_two_level(c, 9);
  const auto b = run_two_level(c, 9);
  CHECK(a.trials == b.trials);
  CHECK(a.ll_trials == b.ll_trials);
  CHECK(a.phases.size() == b.phases.size());
}

TEST_CASE("explicit-role low level ignores the cart by default") {
  TwoLevelExperiment e(small_two_level(), 1);
  const Vector o = e.ll_observe({1.0, 2.0, 0.05, 0.3});
  CHECK(o(0) == 0.0);
  CHECK(o(1) == 0.0);
  CHECK(o(3) == 0.3);
  auto c = small_two_level();
  c.ll_mode = LLMode::kSharedExternal;
  TwoLevelExperiment ri(c, 1);
  CHECK(ri.ll_observe({1.2, 2.0, 0.0, 0.0})(0) == doctest::Approx(0.5));
}

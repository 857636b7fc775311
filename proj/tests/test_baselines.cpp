#include <doctest.h>

#include <cmath>

#include "crex/baselines.hpp"
#include "crex/powergrid.hpp"

using namespace crex;

namespace {

Eigen::VectorXd th(double v) { return Eigen::VectorXd::Constant(1, v); }

// min 1/2 x^2 s.t. x = theta - shift.
Agent shifted_quadratic(const std::string& id, double shift) {
  MpQP p;
  p.H = Eigen::MatrixXd::Identity(1, 1);
  p.f = Eigen::VectorXd::Zero(1);
  p.A.resize(2, 1);
  p.A << 1.0, -1.0;
  p.b.resize(2);
  p.b << -shift, shift;
  p.C = p.A;
  p.signs = {VarSign::Free};
  return {id, p};
}

// min -x s.t. x <= theta, x >= -10.
Agent linear_agent() {
  MpQP p;
  p.H = Eigen::MatrixXd::Zero(1, 1);
  p.f = -Eigen::VectorXd::Ones(1);
  p.A.resize(2, 1);
  p.A << 1.0, -1.0;
  p.b.resize(2);
  p.b << 0.0, 10.0;
  p.C.resize(2, 1);
  p.C << 1.0, 0.0;
  p.signs = {VarSign::Free};
  return {"lin", p};
}

// min x s.t. x <= theta, x >= 1.
Agent needs_cut() {
  MpQP p;
  p.H = Eigen::MatrixXd::Zero(1, 1);
  p.f = Eigen::VectorXd::Ones(1);
  p.A.resize(2, 1);
  p.A << 1.0, -1.0;
  p.b.resize(2);
  p.b << 0.0, -1.0;
  p.C.resize(2, 1);
  p.C << 1.0, 0.0;
  p.signs = {VarSign::Free};
  return {"cut", p};
}

}  // namespace

TEST_CASE("ADMM with a single agent stops at once") {
  const auto r = admm_run({shifted_quadratic("a", 1.0)}, HPolyhedron::box(th(-5), th(5)));
  CHECK(r.iterations <= 2);
}

TEST_CASE("ADMM on two quadratics") {
  const auto r = admm_run({shifted_quadratic("a", 1.0), shifted_quadratic("b", -1.0)},
                          HPolyhedron::box(th(-5), th(5)));
  CHECK(std::abs(r.theta(0)) < 1e-2);
  CHECK(r.J == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.metric <= 1e-3);
  CHECK(r.trace.back().method == "admm");
}

TEST_CASE("ADMM rejects a nonpositive penalty") {
  AdmmConfig c;
  c.rho = 0.0;
  CHECK_THROWS_AS(admm_run({shifted_quadratic("a", 1.0)}, HPolyhedron::box(th(-5), th(5)), c),
                  std::invalid_argument);
}

TEST_CASE("ADMM iteration limit") {
  AdmmConfig c;
  c.max_iter = 3;
  try {
    admm_run({shifted_quadratic("a", 1.0), shifted_quadratic("b", -1.0)},
             HPolyhedron::box(th(-5), th(5)), c);
    FAIL("expected NonConvergedError");
  } catch (const NonConvergedError& e) {
    CHECK(e.trace().size() == 3);
  }
}

TEST_CASE("Benders on a linear agent ends at a box vertex") {
  BendersConfig c;
  c.f_lower0 = -100.0;
  const auto r = benders_run({linear_agent()}, HPolyhedron::box(th(-1), th(2)), c);
  CHECK(r.iterations <= 2);
  CHECK(r.theta(0) == doctest::Approx(2.0));
  CHECK(r.J == doctest::Approx(-2.0));
}

TEST_CASE("Benders bounds bracket the two-quadratic optimum") {
  const auto r = benders_run({shifted_quadratic("a", 1.0), shifted_quadratic("b", -1.0)},
                             HPolyhedron::box(th(-5), th(5)));
  CHECK(r.trace.back().lower <= 1.0 + 1e-9);
  CHECK(r.trace.back().upper >= 1.0 - 1e-9);
  CHECK(r.trace.back().upper - r.trace.back().lower <= 1e-3);
  double lo = -1e300, up = 1e300;
  for (const auto& rec : r.trace) {
    CHECK(rec.lower >= lo - 1e-12);
    CHECK(rec.upper <= up + 1e-12);
    CHECK(rec.lower <= rec.upper + 1e-9);
    lo = rec.lower;
    up = rec.upper;
  }
}

TEST_CASE("Benders reuses the feasibility cut") {
  const Agent a = needs_cut();
  const auto r = benders_run({a}, HPolyhedron::box(th(-5), th(5)));
  REQUIRE(!r.cuts.empty());
  const FeasibilityCut direct = feasibility_cut(a, th(0.0));
  CHECK(r.trace.front().step == "feasibility");
  CHECK((r.cuts.front().normal - direct.normal).norm() == 0.0);
  CHECK(r.cuts.front().rhs == direct.rhs);
  CHECK(r.J == doctest::Approx(1.0));
}

TEST_CASE("baselines agree with the centralized dispatch on the toy system") {
  const MultiAreaSystem sys = load_system(CREX_DATA_DIR "/systems/2area_toy.json");
  const SystemCompilation comp = compile_agents(sys);
  const double J = centralized_solve(sys).J;
  const auto admm = admm_run(comp.agents(), comp.Theta);
  const auto benders = benders_run(comp.agents(), comp.Theta);
  CHECK(std::abs(admm.J - J) <= 1e-3 * std::abs(J));
  CHECK(std::abs(benders.J - J) <= 1e-3 * std::abs(J));
}

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "crex/powergrid.hpp"
#include "crex/qp.hpp"

using namespace crex;

namespace {

const std::string kCases = CREX_DATA_DIR "/cases/";
const std::string kSystems = CREX_DATA_DIR "/systems/";

const char* kTwoBus = R"(function mpc = two_bus
mpc.baseMVA = 100;
mpc.bus = [
  1 3 0 0 0 0 1 1 0 230 1 1.1 0.9;
  2 1 1 0 0 0 1 1 0 230 1 1.1 0.9;
];
mpc.gen = [
  1 0 0 0 0 1 100 1 500 0;
];
mpc.branch = [
  1 2 0 0.5 0 0 0 0 0 0 1 -360 360;
];
mpc.gencost = [
  2 0 0 2 1 0;
];
)";

// Optimal costs from tests/reference_dispatch.py (cvxpy, Clarabel).
const std::map<std::string, double> kReferenceCost = {
    {"2area_toy", 2852.0},     {"2area_stitched", 3579.0}, {"2area_twin", 1400.0},
    {"2area_short", 2296.0},   {"3area_chain", 4219.0},
};

std::string replace(std::string s, const std::string& from, const std::string& to) {
  s.replace(s.find(from), from.size(), to);
  return s;
}

}  // namespace

TEST_CASE("parse a two bus case") {
  const CaseData c = parse_matpower_case(kTwoBus);
  CHECK(c.buses.size() == 2);
  CHECK(c.branches.size() == 1);
  REQUIRE(c.gens.size() == 1);
  CHECK(c.gens[0].Pmax == 500.0);
  CHECK(c.costs[0].c1 == 1.0);
  CHECK(c.costs[0].c2 == 0.0);
  CHECK(c.buses[1].Pd == 1.0);
  CHECK(c.branches[0].x == 0.5);
}

TEST_CASE("comment lines do not change the parse") {
  std::string commented = replace(kTwoBus, "mpc.bus = [\n", "mpc.bus = [\n% a comment\n");
  commented = replace(commented, "mpc.gen = [", "% gen block\nmpc.gen = [ % inline");
  CHECK(parse_matpower_case(commented) == parse_matpower_case(kTwoBus));
}

TEST_CASE("parse errors name the section and line") {
  const std::string bad = replace(kTwoBus, "2 1 1 0 0 0 1 1 0 230 1 1.1 0.9;", "2 1 1 0 0;");
  try {
    parse_matpower_case(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.section() == "bus");
    CHECK(e.line() == 5);
  }
  CHECK_THROWS_AS(parse_matpower_case(replace(kTwoBus, "mpc.gencost", "mpc.other")), ParseError);
  CHECK_THROWS_AS(parse_matpower_case(replace(kTwoBus, "1 2 0 0.5", "1 7 0 0.5")), ParseError);
  CHECK_THROWS_AS(parse_matpower_case(replace(kTwoBus, "1 2 0 0.5", "1 2 0 NaN")), ParseError);
  try {
    parse_matpower_case(replace(kTwoBus, "1 2 0 0.5", "1 2 0 abc"));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.section() == "branch");
    CHECK(e.line() == 11);
  }
}

TEST_CASE("writer round trip on bundled cases") {
  int n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(kCases)) {
    const CaseData c = load_matpower_case(entry.path().string());
    CaseData again = parse_matpower_case(write_matpower_case(c));
    again.name = c.name;
    CHECK(again == c);
    ++n;
  }
  CHECK(n >= 5);
}

TEST_CASE("DC matrices") {
  const DcMatrices m = build_dc_matrices(parse_matpower_case(kTwoBus));
  CHECK(m.B(0, 0) == doctest::Approx(2.0));
  CHECK(m.B(0, 1) == doctest::Approx(-2.0));
  CHECK(m.B(1, 1) == doctest::Approx(2.0));
  CHECK(m.H(0, 0) == doctest::Approx(2.0));
  CHECK(m.H(0, 1) == doctest::Approx(-2.0));

  CaseData tri;
  for (int i = 1; i <= 3; ++i) tri.buses.push_back({i, 1, 0.0});
  tri.branches = {{1, 2, 0.25, 0}, {2, 3, 0.25, 0}, {1, 3, 0.25, 0}};
  const DcMatrices t = build_dc_matrices(tri);
  CHECK((t.B - t.B.transpose()).norm() == 0.0);
  CHECK(t.B(0, 1) == doctest::Approx(-4.0));
  CHECK(t.B(1, 2) == doctest::Approx(-4.0));
  CHECK(t.B(0, 0) == doctest::Approx(8.0));

  for (const auto& entry : std::filesystem::directory_iterator(kSystems)) {
    const DcMatrices s = build_dc_matrices(load_system(entry.path().string()));
    CHECK((s.B * Eigen::VectorXd::Ones(s.B.cols())).norm() < 1e-9);
    CHECK((s.H * Eigen::VectorXd::Ones(s.H.cols())).norm() < 1e-9);
  }
  tri.branches[0].x = 0.0;
  CHECK_THROWS_AS(build_dc_matrices(tri), ModelError);
}

TEST_CASE("stitching rules") {
  CaseData one;
  one.buses = {{1, 1, 0.0}};
  const MultiAreaSystem s = stitch_areas({one, one}, {{{0, 1}, {1, 1}, 0.1, 0.0}}, {0, 1});
  CHECK(s.boundary.size() == 2);
  CHECK(s.ties[0].capacity == 800.0);
  CHECK_THROWS_AS(stitch_areas({one, one}, {{{0, 1}, {1, 9}, 0.1, 0.0}}, {0, 1}), ModelError);
  CHECK_THROWS_AS(stitch_areas({one, one}, {{{0, 1}, {0, 1}, 0.1, 0.0}}, {0, 1}), ModelError);
  CaseData gen = one;
  gen.gens = {{1, 0.0, 10.0}};
  gen.costs = {{0.0, 1.0, 0.0}};
  CHECK_THROWS_AS(stitch_areas({gen, one}, {{{0, 1}, {1, 1}, 0.1, 0.0}}, {0, 1}), ModelError);
}

TEST_CASE("compiled coordinator set") {
  const MultiAreaSystem toy = load_system(kSystems + "2area_toy.json");
  const SystemCompilation c = compile_agents(toy);
  CHECK(c.Theta.dim() == 2);
  CHECK(c.Theta.rows() == 6);
  for (int r = 0; r < c.Theta.rows(); ++r) CHECK_FALSE(c.Theta.is_equality(r));
  CHECK(c.areas.size() == 2);
  for (const auto& a : c.areas) CHECK(a.agent.problem.d() == 2);

  const MultiAreaSystem chain = load_system(kSystems + "3area_chain.json");
  const SystemCompilation cc = compile_agents(chain);
  CHECK(cc.Theta.dim() == 4);
  int eq = 0;
  for (int r = 0; r < cc.Theta.rows(); ++r) eq += cc.Theta.is_equality(r);
  CHECK(eq == 1);
}

TEST_CASE("centralized dispatch on a single case") {
  const CaseData c = parse_matpower_case(kTwoBus);
  const DispatchSolution s = centralized_solve(c);
  CHECK(s.J == doctest::Approx(1.0));
  CHECK(s.g(0) == doctest::Approx(1.0));

  CaseData doubled = c;
  for (auto& b : doubled.buses) b.Pd *= 2.0;
  CHECK(centralized_solve(doubled).J == doctest::Approx(2.0));
}

TEST_CASE("binding tie line splits the dispatch") {
  const DispatchSolution s = centralized_solve(load_system(kSystems + "2area_toy.json"));
  CHECK(s.g(0) == doctest::Approx(20.0));
  CHECK(s.g(1) == doctest::Approx(180.0));
}

TEST_CASE("centralized costs match the reference solver") {
  for (const auto& [name, J] : kReferenceCost) {
    CAPTURE(name);
    const DispatchSolution s = centralized_solve(load_system(kSystems + name + ".json"));
    CHECK(s.J == doctest::Approx(J).epsilon(1e-7));
  }
}

TEST_CASE("area problems reproduce the monolithic optimum") {
  for (const auto& [name, J] : kReferenceCost) {
    CAPTURE(name);
    const MultiAreaSystem sys = load_system(kSystems + name + ".json");
    const SystemCompilation comp = compile_agents(sys);
    const DispatchSolution central = centralized_solve(sys);
    CHECK(contains(comp.Theta, central.theta, 1e-7));
    const DispatchSolution local = assemble_dispatch(sys, comp, central.theta);
    CHECK(local.J == doctest::Approx(J).epsilon(1e-7));

    // The stitched local solutions satisfy the monolithic balance and limits.
    const DcMatrices dc = build_dc_matrices(sys);
    Eigen::VectorXd inj = Eigen::VectorXd::Zero(sys.num_buses());
    int gi = 0;
    for (int a = 0; a < static_cast<int>(sys.areas.size()); ++a) {
      for (const auto& b : sys.areas[a].buses) inj(sys.global_index({a, b.id})) -= b.Pd;
      for (const auto& g : sys.areas[a].gens) inj(sys.global_index({a, g.bus})) += local.g(gi++);
    }
    CHECK((dc.B * local.delta * sys.baseMVA - inj).cwiseAbs().maxCoeff() < 1e-6);
    const Eigen::VectorXd flow = dc.H * local.delta * sys.baseMVA;
    int r = 0;
    for (const auto& a : sys.areas) {
      for (const auto& br : a.branches) CHECK(std::abs(flow(r++)) <= br.rateA + 1e-6);
    }
    for (const auto& t : sys.ties) CHECK(std::abs(flow(r++)) <= t.capacity + 1e-6);
  }
}

TEST_CASE("cold start is infeasible for the short area") {
  const MultiAreaSystem sys = load_system(kSystems + "2area_short.json");
  const SystemCompilation comp = compile_agents(sys);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(comp.Theta.dim());
  CHECK_THROWS_AS(solve_qp(comp.areas[0].agent.problem.at(zero)), InfeasibleError);
  CHECK_NOTHROW(solve_qp(comp.areas[1].agent.problem.at(zero)));
}

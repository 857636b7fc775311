// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "crex/baselines.hpp"
#include "crex/cre.hpp"
#include "crex/degeneracy.hpp"
#include "crex/io.hpp"
#include "crex/powergrid.hpp"
#include "oracles.hpp"

using namespace crex;

namespace {

// Pinned tolerances.
constexpr double kLcpSolutionTol = 1e-7;
constexpr double kLcpRuntimeS = 5.0;
constexpr double kVfTol = 1e-8;
constexpr double kRegionVfTol = 1e-7;
constexpr double kNeighbourhood = 1e-3;
constexpr double kVTol = 1e-2;
constexpr int kCreMaxIter = 200;
constexpr double kCreRelTol = 1e-4;
constexpr double kCreRuntimeS = 30.0;
constexpr double kBaselineMetric = 1e-3;
constexpr double kBaselineRelTol = 1e-3;
constexpr double kScalingTol = 1e-6;
constexpr double kCutTol = 1e-6;
constexpr double kNoise = 1e-9;

const std::string kData = CREX_DATA_DIR;
const std::vector<std::string> kSystems = {"2area_toy", "2area_stitched", "2area_twin",
                                           "2area_short", "3area_chain"};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel_err(double a, double ref) { return std::abs(a - ref) / std::max(1.0, std::abs(ref)); }

Eigen::VectorXd th(double v) { return Eigen::VectorXd::Constant(1, v); }

struct Verdict {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

struct SystemRun {
  MultiAreaSystem system;
  SystemCompilation comp;
  DispatchSolution central;
  CreResult cre;
  double cre_s = 0.0;
};

std::map<std::string, SystemRun>& system_runs() {
  static std::map<std::string, SystemRun> runs = [] {
    std::map<std::string, SystemRun> out;
    for (const auto& name : kSystems) {
      SystemRun r;
      r.system = load_system(kData + "/systems/" + name + ".json");
      r.comp = compile_agents(r.system);
      r.central = centralized_solve(r.system);
      CreConfig cfg;
      cfg.v_tol = kVTol;
      cfg.max_iter = kCreMaxIter;
      const auto t0 = Clock::now();
      r.cre = run_cre(r.comp.agents(), r.comp.Theta, cfg);
      r.cre_s = seconds_since(t0);
      out.emplace(name, std::move(r));
    }
    return out;
  }();
  return runs;
}

// Convex QP min 0.5 x'Hx + f'x s.t. Ax <= b, x >= 0 as an LCP in (x, lambda).
Lcp random_qp_lcp(std::mt19937_64& rng) {
  const int p = 1 + static_cast<int>(rng() % 6);
  const int n = 1 + static_cast<int>(rng() % p);
  const int m = p - n;
  Eigen::MatrixXd F(n, n);
  const int rank = static_cast<int>(rng() % (n + 1));
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, std::max(rank, 1));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < rank; ++j) G(i, j) = oracle::uniform(rng, -1, 1);
  }
  F = G * G.transpose();
  Eigen::MatrixXd A(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = oracle::uniform(rng, -1, 1);
  }
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(p, p);
  M.topLeftCorner(n, n) = F;
  M.topRightCorner(n, m) = A.transpose();
  M.bottomLeftCorner(m, n) = -A;
  Eigen::VectorXd q(p);
  for (int k = 0; k < p; ++k) q(k) = oracle::uniform(rng, -1, 1);
  return Lcp(M, q);
}

Verdict lcp_oracle_equivalence() {
  Verdict v;
  std::mt19937_64 rng(1001);
  int unique = 0, solved = 0;
  const auto t0 = Clock::now();
  for (int trial = 0; trial < 200; ++trial) {
    const Lcp lcp = random_qp_lcp(rng);
    const auto ref = oracle::enumerate_lcp(lcp.M, lcp.q);
    const LcpSolution s = lemke_solve(lcp);
    v.require((s.status == LcpStatus::Solved) == !ref.empty(),
              "feasibility disagrees on trial " + std::to_string(trial));
    if (s.status != LcpStatus::Solved || ref.empty()) continue;
    ++solved;
    bool distinct = false;
    for (const auto& r : ref) {
      distinct = distinct || (r.w - ref[0].w).cwiseAbs().maxCoeff() > kLcpSolutionTol ||
                 (r.z - ref[0].z).cwiseAbs().maxCoeff() > kLcpSolutionTol;
    }
    if (distinct) continue;
    ++unique;
    const double err = std::max((s.w - ref[0].w).cwiseAbs().maxCoeff(),
                                (s.z - ref[0].z).cwiseAbs().maxCoeff());
    v.require(err <= kLcpSolutionTol, "solution differs on trial " + std::to_string(trial));
  }
  const double secs = seconds_since(t0);
  v.require(secs < kLcpRuntimeS, "runtime " + std::to_string(secs) + " s");
  if (v.pass) {
    v.detail = std::to_string(solved) + " solvable, " + std::to_string(unique) +
               " unique, " + std::to_string(secs) + " s";
  }
  return v;
}

Eigen::VectorXd sample_in_ball(const Eigen::VectorXd& c, double r, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Eigen::VectorXd dir(c.size());
  for (int i = 0; i < c.size(); ++i) dir(i) = n01(rng);
  const double scale = std::pow(oracle::uniform(rng, 0, 1), 1.0 / c.size());
  return c + r * scale * dir.normalized();
}

Verdict basis_path_vs_kkt() {
  Verdict v;
  std::mt19937_64 rng(2002);
  int problems = 0;
  for (int attempt = 0; problems < 50 && attempt < 2000; ++attempt) {
    const int n = 1 + static_cast<int>(rng() % 4);
    const int m = 1 + static_cast<int>(rng() % 8);
    const int d = 1 + static_cast<int>(rng() % 2);
    const MpQP p = oracle::random_mpqp(n, m, d, rng);
    Eigen::VectorXd t(d);
    for (int j = 0; j < d; ++j) t(j) = oracle::uniform(rng, -0.3, 0.3);
    KktDiagnostics diag;
    CriticalRegion kkt;
    try {
      kkt = kkt_active_set_solution(p, t, &diag);
    } catch (const Error&) {
      continue;
    }
    if (!diag.zero_multiplier_rows.empty()) continue;
    const auto ball = chebyshev_ball(kkt.region, 10.0);
    if (!ball || ball->radius < 1e-6) continue;
    ++problems;
    const MpLcp l = to_mplcp(p);
    const CriticalRegion path = region_for_basis(p, l, kkt.basis);
    for (int s = 0; s < 100; ++s) {
      const Eigen::VectorXd x = sample_in_ball(ball->center, 0.99 * ball->radius, rng);
      const double ref = kkt.vf(x);
      v.require(std::abs(path.vf(x) - ref) <= kVfTol * std::max(1.0, std::abs(ref)),
                "value function differs on problem " + std::to_string(problems));
    }
    for (int s = 0; s < 1000; ++s) {
      Eigen::VectorXd x(d);
      for (int j = 0; j < d; ++j) x(j) = t(j) + oracle::uniform(rng, -1, 1);
      v.require(contains(kkt.region, x, 1e-9) == contains(path.region, x, 1e-9),
                "membership differs on problem " + std::to_string(problems));
    }
  }
  v.require(problems == 50, "only " + std::to_string(problems) + " nondegenerate problems");
  if (v.pass) v.detail = std::to_string(problems) + " problems";
  return v;
}

bool feasible_at(const MpLcp& l, const Eigen::VectorXd& t) {
  return !oracle::feasible_bases(l, t).empty();
}

Verdict degeneracy_coverage() {
  Verdict v;
  std::mt19937_64 rng(3003);
  const std::vector<std::pair<std::string, double>> fixtures = {
      {"scs_qp", 0.0}, {"flat_lp", 1.0}, {"duplicate_row_lp", 1.0}};
  std::string counts;
  for (const auto& [name, t0] : fixtures) {
    const MpQP p = load_problem(kData + "/problems/" + name + ".json");
    const MpLcp l = to_mplcp(p);
    const RegionBundle b = all_regions_containing(p, l, th(t0));
    const int pn = l.order();
    v.require(b.regions.size() >= 2, name + ": fewer than 2 regions");
    for (std::size_t i = 0; i < b.vertices.size(); ++i) {
      const Eigen::VectorXd& y = b.vertices[i];
      const PairPartition part = recover_basis_from_point(y.head(pn), y.tail(pn));
      v.require(b.candidates_per_vertex[i] == (std::size_t{1} << part.D.size()),
                name + ": candidate count is not 2^|D|");
    }
    int sampled = 0;
    while (sampled < 1000) {
      const Eigen::VectorXd x = th(t0 + (rng() & 1U ? kNeighbourhood : -kNeighbourhood) *
                                            oracle::uniform(rng, 0.5, 1.0));
      if (!feasible_at(l, x)) continue;
      ++sampled;
      bool covered = false;
      for (const auto& r : b.regions) covered = covered || contains(r.region, x, 1e-9);
      v.require(covered, name + ": uncovered point " + std::to_string(x(0)));
    }
    const double ref = b.regions.front().vf(th(t0));
    for (const auto& r : b.regions) {
      v.require(std::abs(r.vf(th(t0)) - ref) <= kRegionVfTol, name + ": value functions differ");
    }
    counts += name + "=" + std::to_string(b.regions.size()) + " ";
  }
  if (v.pass) v.detail = "regions " + counts;
  return v;
}

// Number of distinct solutions among all basic complementary solutions.
int distinct_solutions(const Lcp& lcp) {
  const auto ref = oracle::enumerate_lcp(lcp.M, lcp.q);
  std::vector<Eigen::VectorXd> seen;
  for (const auto& r : ref) {
    Eigen::VectorXd y(2 * r.w.size());
    y << r.w, r.z;
    bool dup = false;
    for (const auto& s : seen) dup = dup || (s - y).cwiseAbs().maxCoeff() <= kLcpSolutionTol;
    if (!dup) seen.push_back(y);
  }
  return static_cast<int>(seen.size());
}

Verdict uniqueness_verdicts() {
  Verdict v;
  const double tol = 1e-7;
  struct Case {
    std::string name;
    double theta;
    bool unique;
  };
  for (const Case& c : {Case{"flat_lp", 1.0, false}, Case{"scs_qp", 0.0, true}}) {
    const MpQP p = load_problem(kData + "/problems/" + c.name + ".json");
    const MpLcp l = to_mplcp(p);
    const RegionBundle b = all_regions_containing(p, l, th(c.theta));
    const bool brute_unique = distinct_solutions(l.at(th(c.theta))) == 1;
    v.require(brute_unique == c.unique, c.name + ": brute force disagrees with expectation");
    v.require(b.verdict.unique() == brute_unique, c.name + ": verdict disagrees with brute force");
    const bool rule = b.verdict.z0_star > tol || b.verdict.u_last > tol;
    v.require(rule == b.verdict.unique(), c.name + ": verdict inconsistent with its certificate");
  }
  if (v.pass) v.detail = "flat_lp NonUnique, scs_qp Unique";
  return v;
}

Verdict cre_exactness() {
  Verdict v;
  std::string detail;
  for (const auto& [name, r] : system_runs()) {
    const double err = rel_err(r.cre.J, r.central.J);
    v.require(r.cre.certificate.v.norm() <= kVTol, name + ": v not below tolerance");
    v.require(r.cre.iterations < kCreMaxIter, name + ": too many iterations");
    v.require(err <= kCreRelTol, name + ": objective error " + std::to_string(err));
    v.require(r.cre_s < kCreRuntimeS, name + ": runtime");
    detail += name + " " + std::to_string(r.cre.iterations) + " it; ";
  }
  v.require(!system_runs().at("2area_short").cre.cuts.empty(), "no cold-start cuts");
  if (v.pass) v.detail = detail;
  return v;
}

Verdict baseline_agreement() {
  Verdict v;
  std::string detail;
  for (const auto& [name, r] : system_runs()) {
    const auto agents = r.comp.agents();
    BaselineResult admm, benders;
    try {
      AdmmConfig ac;
      ac.rho = 0.1;
      ac.tol = kBaselineMetric;
      admm = admm_run(agents, r.comp.Theta, ac);
      BendersConfig bc;
      bc.gap_tol = kBaselineMetric;
      benders = benders_run(agents, r.comp.Theta, bc);
    } catch (const Error& e) {
      v.require(false, name + ": " + e.what());
      continue;
    }
    v.require(admm.metric <= kBaselineMetric, name + ": ADMM metric");
    v.require(benders.metric <= kBaselineMetric, name + ": Benders gap");
    v.require(rel_err(admm.J, r.central.J) <= kBaselineRelTol, name + ": ADMM objective");
    v.require(rel_err(benders.J, r.central.J) <= kBaselineRelTol, name + ": Benders objective");
    v.require(r.cre.iterations <= admm.iterations,
              name + ": CRE " + std::to_string(r.cre.iterations) + " > ADMM " +
                  std::to_string(admm.iterations) + " iterations");
    v.require(r.cre.iterations <= benders.iterations,
              name + ": CRE " + std::to_string(r.cre.iterations) + " > Benders " +
                  std::to_string(benders.iterations) + " iterations");
    detail += name + " " + std::to_string(r.cre.iterations) + "/" +
              std::to_string(admm.iterations) + "/" + std::to_string(benders.iterations) + "; ";
  }
  v.detail = (v.pass ? "" : v.detail + "; ") + "CRE/ADMM/Benders iterations: " + detail;
  return v;
}

Verdict scaling_invariance() {
  Verdict v;
  for (const std::string& name : kSystems) {
    MultiAreaSystem s = load_system(kData + "/systems/" + name + ".json");
    s.scaling = 1.0;
    const SystemCompilation comp = compile_agents(s);
    const auto agents = comp.agents();
    const CreResult base = run_cre(agents, comp.Theta);
    const CreResult scaled =
        run_cre(scale_parameters(agents, 0.01), scale_parameters(comp.Theta, 0.01));
    v.require(std::abs(scaled.J - base.J) <= kScalingTol * std::abs(base.J), name + ": objective");
    const Eigen::VectorXd expected = 100.0 * base.theta;
    v.require((scaled.theta - expected).norm() <= kScalingTol * std::max(1.0, expected.norm()),
              name + ": parameter not scaled by 100");
  }
  if (v.pass) v.detail = std::to_string(kSystems.size()) + " systems";
  return v;
}

Verdict stepsize_law() {
  Verdict v;
  CreConfig c;
  c.eps0 = 1e-2;
  c.alpha = 2.0;
  c.beta = 0.5;
  v.require(stepsize_update(StepCase::Better, 3e-3, c) == 1e-2, "better resets");
  v.require(stepsize_update(StepCase::Same, 3e-3, c) == 6e-3, "same grows");
  v.require(stepsize_update(StepCase::Same, 8e-3, c) == 1e-2, "same is capped");
  v.require(stepsize_update(StepCase::Worse, 4e-3, c) == 2e-3, "worse shrinks");
  v.require(stepsize_update(StepCase::Worse, 1.5e-5, c) == 1e-5, "worse is floored");
  v.require(classify_step(10.0, 9.0, 1e-4) == StepCase::Better, "better branch");
  v.require(classify_step(10.0, 10.0, 1e-4) == StepCase::Same, "same branch");
  v.require(classify_step(10.0, 11.0, 1e-4) == StepCase::Worse, "worse branch");
  if (v.pass) v.detail = "reset, growth with cap, shrink with floor";
  return v;
}

Verdict cut_soundness() {
  Verdict v;
  int cuts = 0;
  for (const auto& [name, r] : system_runs()) {
    for (const FeasibilityCut& cut : r.cre.cuts) {
      const double scale = std::max(1.0, cut.normal.cwiseAbs().maxCoeff());
      v.require(cut.normal.dot(cut.theta) > cut.rhs + kCutTol * scale,
                name + ": cut keeps its generating point");
      v.require(cut.normal.dot(r.central.theta) <= cut.rhs + kCutTol * scale,
                name + ": cut removes the centralized optimum");
      ++cuts;
    }
  }
  v.require(cuts > 0, "no cuts generated");
  if (v.pass) v.detail = std::to_string(cuts) + " cuts";
  return v;
}

Verdict basis_recovery() {
  Verdict v;
  std::mt19937_64 rng(1010);
  for (int trial = 0; trial < 50; ++trial) {
    const int p = 2 + static_cast<int>(rng() % 5);
    const Eigen::MatrixXd M = oracle::random_p_matrix(p, rng);
    Eigen::VectorXd q(p);
    for (int k = 0; k < p; ++k) q(k) = oracle::uniform(rng, -2, 2);
    // Zero some entries of q so that degenerate pairs occur.
    if (trial % 2 == 0) q(static_cast<int>(rng() % p)) = 0.0;
    const LcpSolution s = lemke_solve(Lcp(M, q));
    if (s.status != LcpStatus::Solved) {
      v.require(false, "trial " + std::to_string(trial) + " unsolved");
      continue;
    }
    const PairPartition exact = recover_basis_from_point(s.w, s.z);
    Eigen::VectorXd w = s.w, z = s.z;
    for (int k = 0; k < p; ++k) {
      w(k) += oracle::uniform(rng, -kNoise, kNoise);
      z(k) += oracle::uniform(rng, -kNoise, kNoise);
    }
    const PairPartition noisy = recover_basis_from_point(w, z);
    v.require(noisy.W == exact.W && noisy.Z == exact.Z && noisy.D == exact.D,
              "partition differs on trial " + std::to_string(trial));
  }
  if (v.pass) v.detail = "50 problems";
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"lcp oracle equivalence", lcp_oracle_equivalence},
      {"basis path vs active set", basis_path_vs_kkt},
      {"degeneracy coverage", degeneracy_coverage},
      {"uniqueness verdicts", uniqueness_verdicts},
      {"cre exactness", cre_exactness},
      {"baseline agreement", baseline_agreement},
      {"scaling invariance", scaling_invariance},
      {"stepsize law", stepsize_law},
      {"feasibility cut soundness", cut_soundness},
      {"basis recovery", basis_recovery},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failed += v.pass ? 0 : 1;
    std::printf("criterion %zu %-26s %s  %s\n", i + 1, criteria[i].first.c_str(),
                v.pass ? "PASS" : "FAIL", v.detail.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}

#include "crex/cre.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

namespace crex {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (std::abs(a(i) - b(i)) > 1e-9 * std::max(1.0, std::abs(a(i)))) return a(i) < b(i);
  }
  return false;
}

void push_unique(std::vector<Eigen::VectorXd>& set, const Eigen::VectorXd& g) {
  for (const auto& h : set) {
    if ((h - g).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, h.cwiseAbs().maxCoeff())) return;
  }
  set.push_back(g);
}

// Calls visit(choice) for each element of the product of index lists, up to cap.
template <typename F>
int for_each_combination(const std::vector<std::vector<int>>& lists, int cap, F visit) {
  for (const auto& l : lists) {
    if (l.empty()) return 0;
  }
  std::vector<std::size_t> pos(lists.size(), 0);
  std::vector<int> choice(lists.size());
  int count = 0;
  while (count < cap) {
    for (std::size_t i = 0; i < lists.size(); ++i) choice[i] = lists[i][pos[i]];
    visit(choice);
    ++count;
    std::size_t i = lists.size();
    while (i > 0) {
      --i;
      if (++pos[i] < lists[i].size()) break;
      pos[i] = 0;
      if (i == 0) return count;
    }
    if (lists.empty()) return count;
  }
  return count;
}

}  // namespace

LocalEvaluation local_evaluate(const Agent& agent, const MpLcp& lcp,
                               const Eigen::VectorXd& theta,
                               const RegionOptions& options) {
  LocalEvaluation out;
  try {
    out.bundle = all_regions_containing(agent.problem, lcp, theta, options);
    out.feasible = true;
  } catch (const InfeasibleError& e) {
    out.z0 = e.z0();
  }
  return out;
}

LocalEvaluation local_evaluate(const Agent& agent, const Eigen::VectorXd& theta,
                               const RegionOptions& options) {
  return local_evaluate(agent, to_mplcp(agent.problem), theta, options);
}

FeasibilityCut feasibility_cut(const Agent& agent, const Eigen::VectorXd& theta) {
  const MpQP& p = agent.problem;
  const int n = p.n();
  const int m = p.m();
  ConvexQp qp;
  qp.H = Eigen::MatrixXd::Zero(n + m, n + m);
  qp.f = Eigen::VectorXd::Zero(n + m);
  qp.f.tail(m).setOnes();
  qp.A_in.resize(m, n + m);
  qp.A_in << p.A, -Eigen::MatrixXd::Identity(m, m);
  qp.b_in = p.b + p.C * theta;
  qp.A_eq.resize(0, n + m);
  qp.b_eq.resize(0);
  qp.signs = p.signs;
  qp.signs.resize(n + m, VarSign::Nonneg);
  const QpResult r = solve_qp(qp);
  FeasibilityCut cut;
  cut.violation = r.x.tail(m).sum();
  if (cut.violation <= 1e-8) {
    throw std::logic_error("feasibility cut requested at a feasible theta");
  }
  const Eigen::VectorXd& lam = r.lambda_in;
  const Eigen::VectorXd x = r.x.head(n);
  cut.normal = -(lam.transpose() * p.C);
  cut.rhs = -lam.dot(p.A * x - p.b);
  cut.theta = theta;
  cut.multipliers = lam;
  cut.agent = agent.id;
  return cut;
}

CoordinationResult coordination_solve(
    const std::vector<std::vector<CriticalRegion>>& regions,
    const HPolyhedron& Theta, int combination_cap) {
  const int dim = Theta.dim();
  std::vector<std::vector<int>> lists(regions.size());
  long double total = 1.0L;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    for (std::size_t r = 0; r < regions[i].size(); ++r) {
      if (!regions[i][r].lower_dimensional) lists[i].push_back(static_cast<int>(r));
    }
    if (lists[i].empty()) {
      for (std::size_t r = 0; r < regions[i].size(); ++r) lists[i].push_back(static_cast<int>(r));
    }
    total *= static_cast<long double>(lists[i].size());
  }
  CoordinationResult best;
  best.J = std::numeric_limits<double>::infinity();
  best.combinations_total =
      total > static_cast<long double>(std::numeric_limits<int>::max())
          ? std::numeric_limits<int>::max()
          : static_cast<int>(total);
  for_each_combination(lists, combination_cap, [&](const std::vector<int>& choice) {
    ConvexQp qp = ConvexQp::free_variables(dim);
    double c = 0.0;
    HPolyhedron P = Theta;
    for (std::size_t i = 0; i < choice.size(); ++i) {
      const CriticalRegion& cr = regions[i][choice[i]];
      qp.H += cr.vf.H;
      qp.f += cr.vf.f;
      c += cr.vf.c;
      P = intersect(P, cr.region);
    }
    for (int r = 0; r < P.rows(); ++r) {
      if (P.is_equality(r)) {
        qp.add_equality(P.A().row(r), P.b()(r));
      } else {
        qp.add_inequality(P.A().row(r), P.b()(r));
      }
    }
    QpResult sol;
    try {
      sol = solve_qp(qp);
    } catch (const InfeasibleError&) {
      return;
    }
    ++best.combinations_solved;
    const double J = sol.objective + c;
    const double tie = 1e-9 * std::max(1.0, std::abs(J));
    if (J < best.J - tie || (std::abs(J - best.J) <= tie && lex_less(sol.x, best.theta))) {
      best.J = J;
      best.theta = sol.x;
      best.choice = choice;
    }
  });
  if (best.combinations_solved == 0) {
    throw std::logic_error("every region intersection is empty");
  }
  return best;
}

std::vector<Eigen::VectorXd> subgradients_at(
    const std::vector<std::vector<CriticalRegion>>& regions,
    const Eigen::VectorXd& theta, int combination_cap) {
  std::vector<std::vector<int>> lists(regions.size());
  for (std::size_t i = 0; i < regions.size(); ++i) {
    for (std::size_t r = 0; r < regions[i].size(); ++r) {
      if (contains(regions[i][r].region, theta, 1e-6)) lists[i].push_back(static_cast<int>(r));
    }
  }
  std::vector<Eigen::VectorXd> out;
  for_each_combination(lists, combination_cap, [&](const std::vector<int>& choice) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
    for (std::size_t i = 0; i < choice.size(); ++i) {
      g += regions[i][choice[i]].vf.gradient(theta);
    }
    push_unique(out, g);
  });
  return out;
}

SubgradientCertificate subgradient_step(const std::vector<Eigen::VectorXd>& subdiff,
                                        const Eigen::MatrixXd& normals) {
  if (subdiff.empty()) throw DimensionError("empty subdifferential");
  const int d = static_cast<int>(subdiff[0].size());
  const int k = static_cast<int>(subdiff.size());
  const int l = static_cast<int>(normals.cols());
  // Work with unit-scale columns; the cone part is invariant under positive
  // column scaling.
  double scale = 0.0;
  for (const auto& g : subdiff) scale = std::max(scale, g.norm());
  if (scale == 0.0) scale = 1.0;
  Eigen::VectorXd col_norm = Eigen::VectorXd::Ones(l);
  Eigen::MatrixXd V(d, k + l);
  for (int i = 0; i < k; ++i) V.col(i) = subdiff[i] / scale;
  for (int j = 0; j < l; ++j) {
    const double n = normals.col(j).norm();
    if (n > 0.0) col_norm(j) = n;
    V.col(k + j) = normals.col(j) / col_norm(j);
  }
  ConvexQp qp;
  qp.H = V.transpose() * V;
  qp.f = Eigen::VectorXd::Zero(k + l);
  qp.A_in.resize(0, k + l);
  qp.b_in.resize(0);
  qp.A_eq = Eigen::MatrixXd::Zero(1, k + l);
  qp.A_eq.leftCols(k).setOnes();
  qp.b_eq = Eigen::VectorXd::Ones(1);
  qp.signs.assign(k + l, VarSign::Nonneg);
  const QpResult r = solve_qp(qp);
  SubgradientCertificate cert;
  cert.eta = r.x.head(k);
  cert.zeta = scale * r.x.tail(l).cwiseQuotient(col_norm);
  cert.v = scale * (V * r.x);
  return cert;
}

StepCase classify_step(double J_star, double J_hat, double obj_tol) {
  const double delta = J_star - J_hat;
  if (delta >= obj_tol) return StepCase::Better;
  if (delta >= -obj_tol) return StepCase::Same;
  return StepCase::Worse;
}

double stepsize_update(StepCase c, double eps_prev, const CreConfig& config) {
  switch (c) {
    case StepCase::Better:
      return config.eps0;
    case StepCase::Same:
      return std::min(config.alpha * eps_prev, config.eps0);
    case StepCase::Worse:
      return std::max(config.beta * eps_prev, config.eps_min);
  }
  return config.eps0;
}

namespace {

const char* step_name(StepCase c) {
  switch (c) {
    case StepCase::Better:
      return "better";
    case StepCase::Same:
      return "same";
    case StepCase::Worse:
      return "worse";
  }
  return "";
}

std::vector<LocalEvaluation> evaluate_all(const std::vector<Agent>& agents,
                                          const std::vector<MpLcp>& lcps,
                                          const Eigen::VectorXd& theta,
                                          const CreConfig& config) {
  std::vector<LocalEvaluation> out(agents.size());
  if (config.threads <= 1 || agents.size() <= 1) {
    for (std::size_t i = 0; i < agents.size(); ++i) {
      out[i] = local_evaluate(agents[i], lcps[i], theta, config.regions);
    }
    return out;
  }
  std::size_t next = 0;
  while (next < agents.size()) {
    std::vector<std::future<LocalEvaluation>> batch;
    const std::size_t end =
        std::min(agents.size(), next + static_cast<std::size_t>(config.threads));
    for (std::size_t i = next; i < end; ++i) {
      batch.push_back(std::async(std::launch::async, [&, i] {
        return local_evaluate(agents[i], lcps[i], theta, config.regions);
      }));
    }
    for (std::size_t i = next; i < end; ++i) out[i] = batch[i - next].get();
    next = end;
  }
  return out;
}

}  // namespace

CreResult run_cre(const std::vector<Agent>& agents, const HPolyhedron& Theta0,
                  const CreConfig& config,
                  const std::function<void(const IterationRecord&)>& on_iteration) {
  const auto t_run = Clock::now();
  const int d = Theta0.dim();
  for (const Agent& a : agents) {
    if (a.problem.d() != d) throw DimensionError("agent parameter dimension differs from Theta");
  }
  std::vector<MpLcp> lcps;
  for (const Agent& a : agents) lcps.push_back(to_mplcp(a.problem));

  CreResult res;
  res.Theta = Theta0;
  const Eigen::VectorXd start = config.theta0.value_or(Eigen::VectorXd::Zero(d));
  if (start.size() != d) throw DimensionError("theta0 has the wrong dimension");
  Eigen::VectorXd theta_k = min_norm_projection(res.Theta, start);
  res.theta = theta_k;
  res.J = config.J_init;
  double eps_prev = config.eps0;

  for (int k = 0; k < config.max_iter; ++k) {
    const auto t_iter = Clock::now();
    IterationRecord rec;
    rec.method = "cre";
    rec.k = k;
    const std::vector<LocalEvaluation> evals = evaluate_all(agents, lcps, theta_k, config);
    double local_ms = ms_since(t_iter);
    double deg_ms = 0.0;
    bool all_feasible = true;
    for (const auto& e : evals) {
      if (e.feasible) {
        rec.regions_per_agent.push_back(static_cast<int>(e.bundle->regions.size()));
        deg_ms += e.bundle->degeneracy_ms;
      } else {
        rec.regions_per_agent.push_back(0);
        all_feasible = false;
      }
    }

    if (!all_feasible) {
      for (std::size_t i = 0; i < agents.size(); ++i) {
        if (evals[i].feasible) continue;
        FeasibilityCut cut = feasibility_cut(agents[i], theta_k);
        res.Theta.add_row(cut.normal, cut.rhs);
        res.cuts.push_back(std::move(cut));
        ++rec.cuts_added;
      }
      theta_k = min_norm_projection(res.Theta, theta_k);
      rec.step = "feasibility";
      rec.theta = theta_k;
      rec.J = res.J;
      rec.v_norm = std::numeric_limits<double>::quiet_NaN();
      rec.eps_k = eps_prev;
    } else {
      std::vector<std::vector<CriticalRegion>> regions;
      for (const auto& e : evals) regions.push_back(e.bundle->regions);
      const auto t_coord = Clock::now();
      const CoordinationResult coord =
          coordination_solve(regions, res.Theta, config.combination_cap);
      const double coord_ms = ms_since(t_coord);
      if (coord.combinations_solved > 1) {
        deg_ms += coord_ms * (1.0 - 1.0 / coord.combinations_solved);
      }
      const StepCase sc = classify_step(res.J, coord.J, config.obj_tol);
      const double eps_k = stepsize_update(sc, eps_prev, config);
      if (sc == StepCase::Better) {
        res.J = coord.J;
        res.theta = coord.theta;
        res.subdiff = subgradients_at(regions, res.theta, config.combination_cap);
      } else if (sc == StepCase::Same) {
        for (const auto& g : subgradients_at(regions, res.theta, config.combination_cap)) {
          push_unique(res.subdiff, g);
        }
      }
      if (res.subdiff.empty()) {
        res.subdiff = subgradients_at(regions, coord.theta, config.combination_cap);
      }
      const Eigen::MatrixXd N = normal_cone_generators(res.Theta, res.theta);
      res.certificate = subgradient_step(res.subdiff, N);
      rec.step = step_name(sc);
      rec.theta = res.theta;
      rec.J = res.J;
      rec.v_norm = res.certificate.v.norm();
      rec.eps_k = eps_k;
      eps_prev = eps_k;
      local_ms += coord_ms;
      if (rec.v_norm > config.v_tol) {
        theta_k = res.theta - eps_k * res.certificate.v;
        if (!contains(res.Theta, theta_k, 1e-9)) {
          theta_k = min_norm_projection(res.Theta, theta_k);
        }
      }
    }
    rec.degeneracy_ms = deg_ms;
    rec.cre_solving_ms = std::max(0.0, ms_since(t_iter) - deg_ms);
    rec.wall_ms = ms_since(t_iter);
    res.cre_solving_ms += rec.cre_solving_ms;
    res.degeneracy_ms += rec.degeneracy_ms;
    res.trace.push_back(rec);
    if (on_iteration) on_iteration(rec);
    if (rec.step != "feasibility" && rec.v_norm <= config.v_tol) {
      res.iterations = k + 1;
      res.total_ms = ms_since(t_run);
      return res;
    }
  }
  throw NonConvergedError("CRE reached the iteration limit", res.trace);
}

std::vector<Agent> scale_parameters(const std::vector<Agent>& agents, double factor) {
  std::vector<Agent> out = agents;
  for (Agent& a : out) a.problem.C *= factor;
  return out;
}

HPolyhedron scale_parameters(const HPolyhedron& Theta, double factor) {
  return HPolyhedron(Theta.A() * factor, Theta.b(), Theta.equality());
}

}  // namespace crex

#include "crex/baselines.hpp"

#include <chrono>
#include <cmath>

#include "crex/qp.hpp"

namespace crex {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Eigen::VectorXd start_point(const HPolyhedron& Theta, const std::optional<Eigen::VectorXd>& theta0) {
  const Eigen::VectorXd s = theta0.value_or(Eigen::VectorXd::Zero(Theta.dim()));
  if (s.size() != Theta.dim()) throw DimensionError("theta0 has the wrong dimension");
  return min_norm_projection(Theta, s);
}

}  // namespace

BaselineResult admm_run(const std::vector<Agent>& agents, const HPolyhedron& Theta,
                        const AdmmConfig& config,
                        const std::function<void(const IterationRecord&)>& on_iteration) {
  if (!(config.rho > 0.0)) throw std::invalid_argument("rho must be positive");
  const auto t_run = Clock::now();
  const int d = Theta.dim();
  const int N = static_cast<int>(agents.size());
  const double rho = config.rho;

  // Local problem in (x, theta_i): J(x) + lambda'(theta_i - avg) + rho/2 ||theta_i - avg||^2.
  std::vector<ConvexQp> local(N);
  for (int i = 0; i < N; ++i) {
    const MpQP& p = agents[i].problem;
    if (p.d() != d) throw DimensionError("agent parameter dimension differs from Theta");
    const int n = p.n();
    ConvexQp& qp = local[i];
    qp.H = Eigen::MatrixXd::Zero(n + d, n + d);
    qp.H.topLeftCorner(n, n) = p.H;
    qp.H.bottomRightCorner(d, d) = rho * Eigen::MatrixXd::Identity(d, d);
    qp.f = Eigen::VectorXd::Zero(n + d);
    qp.A_in.resize(p.m(), n + d);
    qp.A_in << p.A, -p.C;
    qp.b_in = p.b;
    qp.A_eq.resize(0, n + d);
    qp.b_eq.resize(0);
    qp.signs = p.signs;
    qp.signs.resize(n + d, VarSign::Free);
  }

  BaselineResult res;
  Eigen::VectorXd avg = start_point(Theta, config.theta0);
  std::vector<Eigen::VectorXd> lambda(N, Eigen::VectorXd::Zero(d));
  std::vector<Eigen::VectorXd> copies(N, avg);
  for (int k = 0; k < config.max_iter; ++k) {
    const auto t_iter = Clock::now();
    double fP = 0.0;
    for (int i = 0; i < N; ++i) {
      const MpQP& p = agents[i].problem;
      const int n = p.n();
      local[i].f.head(n) = p.f;
      local[i].f.tail(d) = lambda[i] - rho * avg;
      const QpResult r = solve_qp(local[i]);
      const Eigen::VectorXd x = r.x.head(n);
      copies[i] = r.x.tail(d);
      fP += 0.5 * x.dot(p.H * x) + p.f.dot(x);
    }
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < N; ++i) mean += copies[i] + lambda[i] / rho;
    mean /= N;
    avg = contains(Theta, mean, 1e-12) ? mean : min_norm_projection(Theta, mean);
    double fD = fP;
    double residual = 0.0;
    for (int i = 0; i < N; ++i) {
      const Eigen::VectorXd gap = copies[i] - avg;
      fD += lambda[i].dot(gap);
      residual += gap.lpNorm<1>();
      lambda[i] += rho * gap;
    }
    const double metric = std::abs(fP - fD) + residual;

    IterationRecord rec;
    rec.method = "admm";
    rec.k = k;
    rec.theta = avg;
    rec.J = fP;
    rec.v_norm = metric;
    rec.step = "step";
    rec.lower = fD;
    rec.upper = fP;
    rec.wall_ms = ms_since(t_iter);
    rec.cre_solving_ms = rec.wall_ms;
    res.trace.push_back(rec);
    if (on_iteration) on_iteration(rec);
    if (metric <= config.tol) {
      res.theta = avg;
      res.J = fP;
      res.metric = metric;
      res.iterations = k + 1;
      res.total_ms = ms_since(t_run);
      return res;
    }
  }
  throw NonConvergedError("ADMM reached the iteration limit", res.trace);
}

BaselineResult benders_run(const std::vector<Agent>& agents, const HPolyhedron& Theta,
                           const BendersConfig& config,
                           const std::function<void(const IterationRecord&)>& on_iteration) {
  if (config.f_lower0 > config.f_upper0) throw std::invalid_argument("f_lower0 exceeds f_upper0");
  const auto t_run = Clock::now();
  const int d = Theta.dim();
  const int N = static_cast<int>(agents.size());
  std::vector<MpLcp> lcps;
  for (const Agent& a : agents) {
    if (a.problem.d() != d) throw DimensionError("agent parameter dimension differs from Theta");
    lcps.push_back(to_mplcp(a.problem));
  }

  // Master over (theta, eta_1..eta_N): min sum eta.
  ConvexQp master = ConvexQp::free_variables(d + N);
  master.f.tail(N).setOnes();
  for (int r = 0; r < Theta.rows(); ++r) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(d + N);
    row.head(d) = Theta.A().row(r);
    if (Theta.is_equality(r)) {
      master.add_equality(row, Theta.b()(r));
    } else {
      master.add_inequality(row, Theta.b()(r));
    }
  }
  {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(d + N);
    row.tail(N).setConstant(-1.0);
    master.add_inequality(row, -config.f_lower0);
  }

  BaselineResult res;
  Eigen::VectorXd theta = start_point(Theta, config.theta0);
  double lower = config.f_lower0;
  double upper = config.f_upper0;
  res.theta = theta;
  for (int k = 0; k < config.max_iter; ++k) {
    const auto t_iter = Clock::now();
    IterationRecord rec;
    rec.method = "benders";
    rec.k = k;
    rec.step = "step";
    bool feasible = true;
    std::vector<LocalEvaluation> evals(N);
    for (int i = 0; i < N; ++i) {
      evals[i] = local_evaluate(agents[i], lcps[i], theta, config.regions);
      if (!evals[i].feasible) feasible = false;
    }
    if (!feasible) {
      for (int i = 0; i < N; ++i) {
        if (evals[i].feasible) continue;
        FeasibilityCut cut = feasibility_cut(agents[i], theta);
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(d + N);
        row.head(d) = cut.normal;
        master.add_inequality(row, cut.rhs);
        res.cuts.push_back(std::move(cut));
        ++rec.cuts_added;
      }
      rec.step = "feasibility";
    } else {
      double total = 0.0;
      for (int i = 0; i < N; ++i) {
        const CriticalRegion& cr = evals[i].bundle->regions.front();
        const double Ji = cr.vf(theta);
        const Eigen::VectorXd g = cr.vf.gradient(theta);
        total += Ji;
        // eta_i >= Ji + g'(theta' - theta)
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(d + N);
        row.head(d) = g.transpose();
        row(d + i) = -1.0;
        master.add_inequality(row, g.dot(theta) - Ji);
        rec.regions_per_agent.push_back(static_cast<int>(evals[i].bundle->regions.size()));
      }
      if (total < upper) {
        upper = total;
        res.theta = theta;
      }
    }
    const QpResult m = solve_qp(master);
    lower = std::max(lower, m.objective);
    theta = m.x.head(d);
    rec.theta = res.theta;
    rec.J = upper;
    rec.v_norm = upper - lower;
    rec.lower = lower;
    rec.upper = upper;
    rec.wall_ms = ms_since(t_iter);
    rec.cre_solving_ms = rec.wall_ms;
    res.trace.push_back(rec);
    if (on_iteration) on_iteration(rec);
    if (upper - lower <= config.gap_tol) {
      res.J = upper;
      res.metric = upper - lower;
      res.iterations = k + 1;
      res.total_ms = ms_since(t_run);
      return res;
    }
  }
  throw NonConvergedError("Benders reached the iteration limit", res.trace);
}

}  // namespace crex

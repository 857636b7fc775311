#include "crex/mplcp.hpp"

#include <algorithm>
#include <cmath>

namespace crex {

void MpQP::validate() const {
  const int n_ = n();
  if (H.rows() != n_ || H.cols() != n_) throw DimensionError("H must be n x n");
  if (static_cast<int>(signs.size()) != n_) {
    throw DimensionError("signs must have one entry per variable");
  }
  if (A.rows() != m() || (m() > 0 && A.cols() != n_)) {
    throw DimensionError("A must be m x n");
  }
  if (C.rows() != m()) throw DimensionError("C must have m rows");
  if (!H.allFinite() || !f.allFinite() || !A.allFinite() || !b.allFinite() ||
      !C.allFinite()) {
    throw DimensionError("problem data has non-finite entries");
  }
  if (n_ == 0) return;
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw DimensionError("H is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      0.5 * (H + H.transpose()), Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-9 * scale) {
    throw DimensionError("H is not positive semidefinite");
  }
}

ConvexQp MpQP::at(const Eigen::VectorXd& theta) const {
  if (theta.size() != d()) throw DimensionError("theta has the wrong dimension");
  ConvexQp qp;
  qp.H = H;
  qp.f = f;
  qp.A_in = A;
  qp.b_in = b + C * theta;
  qp.A_eq.resize(0, n());
  qp.b_eq.resize(0);
  qp.signs = signs;
  return qp;
}

Lcp MpLcp::at(const Eigen::VectorXd& theta) const {
  if (theta.size() != d()) throw DimensionError("theta has the wrong dimension");
  return Lcp(M, q + Q * theta);
}

Eigen::VectorXd MpLcp::recover_x(const Eigen::VectorXd& z) const {
  return recovery * z.head(n_split);
}

MpLcp to_mplcp(const MpQP& problem) {
  problem.validate();
  const int n = problem.n();
  const int m = problem.m();
  const int d = problem.d();
  int n_split = 0;
  for (VarSign s : problem.signs) n_split += (s == VarSign::Free) ? 2 : 1;

  MpLcp out;
  out.n_original = n;
  out.n_split = n_split;
  out.m = m;
  out.recovery = Eigen::MatrixXd::Zero(n, n_split);
  int col = 0;
  for (int j = 0; j < n; ++j) {
    out.recovery(j, col++) = 1.0;
    if (problem.signs[j] == VarSign::Free) out.recovery(j, col++) = -1.0;
  }
  const Eigen::MatrixXd& R = out.recovery;
  const Eigen::MatrixXd Hs = R.transpose() * problem.H * R;
  const Eigen::MatrixXd As =
      m > 0 ? Eigen::MatrixXd(problem.A * R) : Eigen::MatrixXd(0, n_split);

  const int p = n_split + m;
  out.M = Eigen::MatrixXd::Zero(p, p);
  out.M.topLeftCorner(n_split, n_split) = Hs;
  out.M.topRightCorner(n_split, m) = As.transpose();
  out.M.bottomLeftCorner(m, n_split) = -As;
  out.q.resize(p);
  out.q.head(n_split) = R.transpose() * problem.f;
  out.q.tail(m) = problem.b;
  out.Q = Eigen::MatrixXd::Zero(p, d);
  out.Q.bottomRows(m) = problem.C;
  return out;
}

AffineMap parametric_solution(const MpLcp& lcp, const ComplementaryBasis& basis) {
  const TableauCoefficients t =
      transformed_coefficients(lcp.M, lcp.q, lcp.Q, basis);
  return AffineMap{t.Qbar, t.qbar};
}

namespace {

HPolyhedron region_from_map(const AffineMap& yb) {
  HPolyhedron P = HPolyhedron::whole_space(static_cast<int>(yb.T.cols()));
  for (int r = 0; r < yb.T.rows(); ++r) {
    const bool flat = yb.T.cols() == 0 || yb.T.row(r).cwiseAbs().maxCoeff() <= 1e-11;
    if (flat && yb.k(r) >= -1e-9) continue;
    P.add_row(-yb.T.row(r), yb.k(r));
  }
  return P;
}

AffineMap x_map_from(const MpLcp& lcp, const ComplementaryBasis& basis,
                     const AffineMap& yb) {
  const int p = lcp.order();
  const int d = lcp.d();
  Eigen::MatrixXd Tz = Eigen::MatrixXd::Zero(lcp.n_split, d);
  Eigen::VectorXd kz = Eigen::VectorXd::Zero(lcp.n_split);
  const auto& idx = basis.indices();
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const int j = idx[r] - p;
    if (j >= 0 && j < lcp.n_split) {
      Tz.row(j) = yb.T.row(r);
      kz(j) = yb.k(r);
    }
  }
  return AffineMap{lcp.recovery * Tz, lcp.recovery * kz};
}

QuadraticForm vf_from_x_map(const MpQP& problem, const AffineMap& x) {
  QuadraticForm vf;
  const Eigen::MatrixXd HT = problem.H * x.T;
  vf.H = x.T.transpose() * HT;
  vf.H = 0.5 * (vf.H + vf.H.transpose());
  vf.f = HT.transpose() * x.k + x.T.transpose() * problem.f;
  vf.c = 0.5 * x.k.dot(problem.H * x.k) + problem.f.dot(x.k);
  return vf;
}

}  // namespace

HPolyhedron critical_region(const MpLcp& lcp, const ComplementaryBasis& basis) {
  return region_from_map(parametric_solution(lcp, basis));
}

QuadraticForm value_function(const MpQP& problem, const MpLcp& lcp,
                             const ComplementaryBasis& basis) {
  const AffineMap yb = parametric_solution(lcp, basis);
  return vf_from_x_map(problem, x_map_from(lcp, basis, yb));
}

CriticalRegion region_for_basis(const MpQP& problem, const MpLcp& lcp,
                                const ComplementaryBasis& basis) {
  CriticalRegion cr;
  cr.solution_map = parametric_solution(lcp, basis);
  cr.region = region_from_map(cr.solution_map);
  cr.x_map = x_map_from(lcp, basis, cr.solution_map);
  cr.vf = vf_from_x_map(problem, cr.x_map);
  cr.basis = basis;
  return cr;
}

CriticalRegion kkt_active_set_solution(const MpQP& problem,
                                       const Eigen::VectorXd& theta,
                                       KktDiagnostics* diagnostics) {
  problem.validate();
  const int n = problem.n();
  const int m = problem.m();
  const int d = problem.d();
  const QpResult sol = solve_qp(problem.at(theta));

  // Sign restrictions become rows -x_j <= 0 after the problem rows.
  std::vector<int> bound_vars;
  for (int j = 0; j < n; ++j) {
    if (problem.signs[j] == VarSign::Nonneg) bound_vars.push_back(j);
  }
  const int rows = m + static_cast<int>(bound_vars.size());
  Eigen::MatrixXd A(rows, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(rows, d);
  Eigen::VectorXd lam(rows);
  A.topRows(m) = problem.A;
  b.head(m) = problem.b;
  C.topRows(m) = problem.C;
  lam.head(m) = sol.lambda_in;
  const Eigen::VectorXd grad =
      problem.H * sol.x + problem.f +
      (m > 0 ? Eigen::VectorXd(problem.A.transpose() * sol.lambda_in)
             : Eigen::VectorXd::Zero(n));
  for (std::size_t k = 0; k < bound_vars.size(); ++k) {
    A.row(m + k) = -Eigen::RowVectorXd::Unit(n, bound_vars[k]);
    lam(m + k) = grad(bound_vars[k]);
  }

  KktDiagnostics diag;
  std::vector<int> inactive;
  for (int i = 0; i < rows; ++i) {
    const double rhs = b(i) + C.row(i).dot(theta);
    const double slack = rhs - A.row(i).dot(sol.x);
    if (std::abs(slack) <= kActiveTol * std::max(1.0, std::abs(rhs))) {
      diag.active_rows.push_back(i);
      if (lam(i) <= kActiveTol) diag.zero_multiplier_rows.push_back(i);
    } else {
      inactive.push_back(i);
    }
  }
  const int na = static_cast<int>(diag.active_rows.size());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + na, n + na);
  K.topLeftCorner(n, n) = problem.H;
  for (int a = 0; a < na; ++a) {
    K.block(0, n + a, n, 1) = A.row(diag.active_rows[a]).transpose();
    K.block(n + a, 0, 1, n) = A.row(diag.active_rows[a]);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(K);
  const auto& sv = svd.singularValues();
  diag.reciprocal_condition =
      sv.size() == 0 || sv(0) == 0.0 ? 0.0 : sv(sv.size() - 1) / sv(0);
  if (diagnostics != nullptr) *diagnostics = diag;
  if (sv.size() > 0 && diag.reciprocal_condition < 1e-10) {
    throw DegenerateError("KKT matrix of the active set is singular");
  }

  Eigen::MatrixXd rhs_T = Eigen::MatrixXd::Zero(n + na, d);
  Eigen::VectorXd rhs_k = Eigen::VectorXd::Zero(n + na);
  rhs_k.head(n) = -problem.f;
  for (int a = 0; a < na; ++a) {
    rhs_T.row(n + a) = C.row(diag.active_rows[a]);
    rhs_k(n + a) = b(diag.active_rows[a]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  const Eigen::MatrixXd T = lu.solve(rhs_T);
  const Eigen::VectorXd k = lu.solve(rhs_k);

  CriticalRegion cr;
  cr.x_map = AffineMap{T.topRows(n), k.head(n)};
  cr.region = HPolyhedron::whole_space(d);
  for (int i : inactive) {
    cr.region.add_row(A.row(i) * cr.x_map.T - C.row(i),
                      b(i) - A.row(i).dot(cr.x_map.k));
  }
  for (int a = 0; a < na; ++a) {
    cr.region.add_row(-T.row(n + a), k(n + a));
  }
  cr.vf = vf_from_x_map(problem, cr.x_map);
  if (sol.basis) {
    cr.basis = *sol.basis;
    cr.solution_map = parametric_solution(to_mplcp(problem), cr.basis);
  }
  return cr;
}

}  // namespace crex

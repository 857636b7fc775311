#include "crex/qp.hpp"

#include "crex/mplcp.hpp"

namespace crex {

ConvexQp ConvexQp::free_variables(int n) {
  ConvexQp qp;
  qp.H = Eigen::MatrixXd::Zero(n, n);
  qp.f = Eigen::VectorXd::Zero(n);
  qp.A_in.resize(0, n);
  qp.b_in.resize(0);
  qp.A_eq.resize(0, n);
  qp.b_eq.resize(0);
  qp.signs.assign(n, VarSign::Free);
  return qp;
}

namespace {

void append_row(Eigen::MatrixXd& A, Eigen::VectorXd& b,
                const Eigen::RowVectorXd& a, double rhs) {
  const Eigen::Index r = A.rows();
  A.conservativeResize(r + 1, a.size());
  b.conservativeResize(r + 1);
  A.row(r) = a;
  b(r) = rhs;
}

}  // namespace

void ConvexQp::add_inequality(const Eigen::RowVectorXd& a, double rhs) {
  if (a.size() != n()) throw DimensionError("row length differs from n");
  append_row(A_in, b_in, a, rhs);
}

void ConvexQp::add_equality(const Eigen::RowVectorXd& a, double rhs) {
  if (a.size() != n()) throw DimensionError("row length differs from n");
  append_row(A_eq, b_eq, a, rhs);
}

QpResult solve_qp(const ConvexQp& qp, const LemkeOptions& options) {
  const int n = qp.n();
  const int m_in = static_cast<int>(qp.b_in.size());
  const int m_eq = static_cast<int>(qp.b_eq.size());
  if (qp.A_in.rows() != m_in || qp.A_eq.rows() != m_eq ||
      (m_in > 0 && qp.A_in.cols() != n) || (m_eq > 0 && qp.A_eq.cols() != n)) {
    throw DimensionError("QP constraint shapes are inconsistent");
  }
  MpQP mp;
  mp.H = qp.H;
  mp.f = qp.f;
  mp.signs = qp.signs;
  mp.A.resize(m_in + 2 * m_eq, n);
  mp.b.resize(m_in + 2 * m_eq);
  if (m_in > 0) {
    mp.A.topRows(m_in) = qp.A_in;
    mp.b.head(m_in) = qp.b_in;
  }
  if (m_eq > 0) {
    mp.A.middleRows(m_in, m_eq) = qp.A_eq;
    mp.A.bottomRows(m_eq) = -qp.A_eq;
    mp.b.segment(m_in, m_eq) = qp.b_eq;
    mp.b.tail(m_eq) = -qp.b_eq;
  }
  mp.C = Eigen::MatrixXd::Zero(mp.b.size(), 0);
  mp.validate();
  const MpLcp lcp = to_mplcp(mp);
  const LcpSolution sol = lemke_solve(lcp.at(Eigen::VectorXd(0)), options);
  if (sol.status != LcpStatus::Solved) {
    throw InfeasibleError("QP is infeasible or unbounded", sol.z0,
                          sol.ray_termination);
  }
  QpResult out;
  out.x = lcp.recover_x(sol.z);
  const Eigen::VectorXd lam = sol.z.segment(lcp.n_split, lcp.m);
  out.lambda_in = lam.head(m_in);
  out.lambda_eq = lam.segment(m_in, m_eq) - lam.tail(m_eq);
  out.objective = 0.5 * out.x.dot(qp.H * out.x) + qp.f.dot(out.x);
  out.pivots = static_cast<int>(sol.pivots.size());
  out.basis = sol.basis;
  return out;
}

}  // namespace crex

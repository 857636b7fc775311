#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace crex::oracle {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  // Fixed transform of raw engine output so values do not depend on the
  // standard library's distribution implementation.
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

std::vector<EnumeratedSolution> enumerate_lcp(const Eigen::MatrixXd& M,
                                              const Eigen::VectorXd& q,
                                              double tol) {
  const int p = static_cast<int>(q.size());
  std::vector<EnumeratedSolution> out;
  for (unsigned mask = 0; mask < (1U << p); ++mask) {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(p, p);
    std::vector<int> idx;
    for (int k = 0; k < p; ++k) {
      if (mask & (1U << k)) {
        B.col(k) = -M.col(k);
        idx.push_back(k + p);
      } else {
        B(k, k) = 1.0;
        idx.push_back(k);
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    if (std::abs(B.determinant()) < 1e-10) continue;
    const Eigen::VectorXd y = lu.solve(q);
    if (y.minCoeff() < -tol) continue;
    EnumeratedSolution s;
    s.w = Eigen::VectorXd::Zero(p);
    s.z = Eigen::VectorXd::Zero(p);
    for (int k = 0; k < p; ++k) {
      if (mask & (1U << k)) {
        s.z(k) = y(k);
      } else {
        s.w(k) = y(k);
      }
    }
    std::sort(idx.begin(), idx.end());
    s.basis = idx;
    out.push_back(s);
  }
  return out;
}

std::vector<std::vector<int>> feasible_bases(const MpLcp& lcp,
                                             const Eigen::VectorXd& theta,
                                             double tol) {
  const int p = lcp.order();
  const Eigen::VectorXd qe = lcp.q + lcp.Q * theta;
  std::vector<std::vector<int>> out;
  for (unsigned mask = 0; mask < (1U << p); ++mask) {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(p, p);
    std::vector<int> idx;
    for (int k = 0; k < p; ++k) {
      if (mask & (1U << k)) {
        B.col(k) = -lcp.M.col(k);
        idx.push_back(k + p);
      } else {
        B(k, k) = 1.0;
        idx.push_back(k);
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(B);
    const auto& sv = svd.singularValues();
    if (sv(p - 1) <= 1e-9 * sv(0)) continue;
    const Eigen::VectorXd y = B.colPivHouseholderQr().solve(qe);
    if (y.minCoeff() < -tol) continue;
    std::sort(idx.begin(), idx.end());
    out.push_back(idx);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Eigen::VectorXd> polytope_vertices(const Eigen::MatrixXd& A,
                                               const Eigen::VectorXd& b,
                                               double tol) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  std::vector<Eigen::VectorXd> out;
  std::vector<bool> pick(m, false);
  std::fill(pick.end() - n, pick.end(), true);
  do {
    Eigen::MatrixXd S(n, n);
    Eigen::VectorXd r(n);
    int c = 0;
    for (int i = 0; i < m; ++i) {
      if (pick[i]) {
        S.row(c) = A.row(i);
        r(c++) = b(i);
      }
    }
    if (std::abs(S.determinant()) < 1e-10) continue;
    const Eigen::VectorXd x = S.lu().solve(r);
    if ((A * x - b).maxCoeff() > tol) continue;
    bool dup = false;
    for (const auto& v : out) dup = dup || (v - x).norm() < 1e-7;
    if (!dup) out.push_back(x);
  } while (std::next_permutation(pick.begin(), pick.end()));
  return out;
}

Eigen::MatrixXd random_psd(int p, std::mt19937_64& rng, int rank) {
  if (rank < 0) rank = p;
  Eigen::MatrixXd F(p, rank);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < rank; ++j) F(i, j) = uniform(rng, -1, 1);
  }
  Eigen::MatrixXd S(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) S(i, j) = uniform(rng, -1, 1);
  }
  // Symmetric PSD part plus a skew part keeps x'Mx >= 0.
  return F * F.transpose() + (S - S.transpose());
}

Eigen::MatrixXd random_p_matrix(int p, std::mt19937_64& rng) {
  // Strictly diagonally dominant with positive diagonal.
  Eigen::MatrixXd M(p, p);
  for (int i = 0; i < p; ++i) {
    double off = 0.0;
    for (int j = 0; j < p; ++j) {
      if (i == j) continue;
      M(i, j) = uniform(rng, -1, 1);
      off += std::abs(M(i, j));
    }
    M(i, i) = off + uniform(rng, 0.5, 2.0);
  }
  return M;
}

MpQP random_mpqp(int n, int m, int d, std::mt19937_64& rng) {
  MpQP qp;
  Eigen::MatrixXd F(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) F(i, j) = uniform(rng, -1, 1);
  }
  qp.H = F * F.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
  qp.f.resize(n);
  for (int i = 0; i < n; ++i) qp.f(i) = uniform(rng, -2, 2);
  qp.A.resize(m, n);
  qp.b.resize(m);
  qp.C.resize(m, d);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) qp.A(i, j) = uniform(rng, -1, 1);
    for (int j = 0; j < d; ++j) qp.C(i, j) = uniform(rng, -1, 1);
    qp.b(i) = uniform(rng, 0.2, 1.5);
  }
  qp.signs.assign(n, VarSign::Nonneg);
  return qp;
}

}  // namespace crex::oracle

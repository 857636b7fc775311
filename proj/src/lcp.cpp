#include "crex/lcp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace crex {

Lcp::Lcp(Eigen::MatrixXd M_in, Eigen::VectorXd q_in)
    : M(std::move(M_in)), q(std::move(q_in)) {
  if (M.rows() != M.cols() || M.rows() != q.size()) {
    throw DimensionError("LCP needs square M matching q");
  }
  if (!M.allFinite() || !q.allFinite()) {
    throw DimensionError("LCP data has non-finite entries");
  }
}

int numerical_rank(const Eigen::MatrixXd& X, double rel_tol) {
  if (X.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  const Eigen::MatrixXd R = qr.matrixR().template triangularView<Eigen::Upper>();
  const int k = static_cast<int>(std::min(R.rows(), R.cols()));
  double top = 0.0;
  for (int i = 0; i < k; ++i) top = std::max(top, std::abs(R(i, i)));
  if (top == 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < k; ++i) {
    if (std::abs(R(i, i)) > rel_tol * top) ++rank;
  }
  return rank;
}

Eigen::MatrixXd basis_matrix(const Eigen::MatrixXd& M,
                             const std::vector<int>& indices) {
  const int p = static_cast<int>(M.rows());
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(p, indices.size());
  for (std::size_t c = 0; c < indices.size(); ++c) {
    const int idx = indices[c];
    if (idx < p) {
      B(idx, c) = 1.0;
    } else {
      B.col(c) = -M.col(idx - p);
    }
  }
  return B;
}

namespace {

void check_pairs(const std::vector<int>& indices, int p) {
  if (static_cast<int>(indices.size()) != p) {
    throw DimensionError("basis must have exactly p indices");
  }
  std::vector<char> seen(p, 0);
  for (int idx : indices) {
    if (idx < 0 || idx >= 2 * p) throw DimensionError("basis index out of range");
    const int k = idx % p;
    if (seen[k]) throw DimensionError("basis holds both members of a pair");
    seen[k] = 1;
  }
}

}  // namespace

ComplementaryBasis ComplementaryBasis::make(std::vector<int> indices,
                                            const Eigen::MatrixXd& M) {
  const int p = static_cast<int>(M.rows());
  std::sort(indices.begin(), indices.end());
  check_pairs(indices, p);
  if (numerical_rank(basis_matrix(M, indices)) < p) {
    throw DimensionError("basis columns are linearly dependent");
  }
  return ComplementaryBasis(std::move(indices), p);
}

ComplementaryBasis ComplementaryBasis::make_unchecked(std::vector<int> indices,
                                                      int p) {
  std::sort(indices.begin(), indices.end());
  check_pairs(indices, p);
  return ComplementaryBasis(std::move(indices), p);
}

ComplementaryBasis ComplementaryBasis::all_w(int p) {
  std::vector<int> idx(p);
  for (int i = 0; i < p; ++i) idx[i] = i;
  return ComplementaryBasis(std::move(idx), p);
}

bool ComplementaryBasis::contains(int idx) const {
  return std::binary_search(indices_.begin(), indices_.end(), idx);
}

int ComplementaryBasis::basic_of_pair(int k) const {
  return contains(k) ? k : k + p_;
}

namespace {

// Column of [I, -M, -1] for variable idx; 2p is the artificial variable.
Eigen::VectorXd lemke_column(const Eigen::MatrixXd& M, int idx) {
  const int p = static_cast<int>(M.rows());
  if (idx == 2 * p) return -Eigen::VectorXd::Ones(p);
  if (idx < p) return Eigen::VectorXd::Unit(p, idx);
  return -M.col(idx - p);
}

class LemkeRun {
 public:
  LemkeRun(const Lcp& lcp, const LemkeOptions& opt)
      : M_(lcp.M), q_(lcp.q), opt_(opt), p_(lcp.order()) {
    basis_.resize(p_);
    for (int i = 0; i < p_; ++i) basis_[i] = i;
    Binv_ = Eigen::MatrixXd::Identity(p_, p_);
    beta_ = q_;
  }

  LcpSolution run() {
    LcpSolution out;
    if (p_ == 0 || q_.minCoeff() >= 0.0) {
      return finish_solved(out);
    }
    const int budget =
        opt_.max_pivots > 0 ? opt_.max_pivots : 50 * p_ * p_ + 1000;
    const int z0 = 2 * p_;

    // Initial pivot: z0 enters and replaces the most negative q_i, ties
    // broken lexicographically on rows of B^-1 = I.
    int r = 0;
    {
      const double qmin = q_.minCoeff();
      const double tie = 1e-12 * std::max(1.0, std::abs(qmin));
      std::vector<int> rows;
      for (int i = 0; i < p_; ++i) {
        if (q_(i) < 0.0 && q_(i) <= qmin + tie) rows.push_back(i);
      }
      r = rows.back();
    }
    int entering = z0;
    int leaving = pivot(r, entering, out);
    entering = complement_index(leaving, p_);

    while (true) {
      if (static_cast<int>(out.pivots.size()) > budget) {
        throw NumericalError("Lemke pivot budget exhausted", out.pivots);
      }
      const Eigen::VectorXd d = Binv_ * lemke_column(M_, entering);
      const int row = ratio_test(d);
      if (row < 0) {
        return finish_ray(out, entering);
      }
      leaving = pivot(row, entering, out, d);
      if (leaving == z0) {
        return finish_solved(out);
      }
      entering = complement_index(leaving, p_);
    }
  }

 private:
  int ratio_test(const Eigen::VectorXd& d) const {
    std::vector<int> cand;
    for (int i = 0; i < p_; ++i) {
      if (d(i) > opt_.ratio_tol) cand.push_back(i);
    }
    if (cand.empty()) return -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i : cand) best = std::min(best, std::max(beta_(i), 0.0) / d(i));
    const double tie = 1e-9 * std::max(1.0, std::abs(best));
    std::vector<int> ties;
    for (int i : cand) {
      if (std::max(beta_(i), 0.0) / d(i) <= best + tie) ties.push_back(i);
    }
    for (int i : ties) {
      if (basis_[i] == 2 * p_) return i;
    }
    // Lexicographic tie break on rows of B^-1 scaled by the pivot column.
    for (int c = 0; c < p_ && ties.size() > 1; ++c) {
      double low = std::numeric_limits<double>::infinity();
      for (int i : ties) low = std::min(low, Binv_(i, c) / d(i));
      std::vector<int> keep;
      for (int i : ties) {
        if (Binv_(i, c) / d(i) <= low + 1e-12) keep.push_back(i);
      }
      ties.swap(keep);
    }
    return ties.front();
  }

  int pivot(int row, int entering, LcpSolution& out) {
    return pivot(row, entering, out, Binv_ * lemke_column(M_, entering));
  }

  int pivot(int row, int entering, LcpSolution& out, const Eigen::VectorXd& d) {
    const double piv = d(row);
    if (std::abs(piv) < opt_.pivot_tol) {
      throw NumericalError("Lemke pivot below tolerance", out.pivots);
    }
    const int leaving = basis_[row];
    basis_[row] = entering;
    out.pivots.push_back({entering, leaving, row, piv});
    if (opt_.trace != nullptr) {
      nlohmann::json rec = {{"pivot", out.pivots.size()},
                            {"entering", entering},
                            {"leaving", leaving},
                            {"row", row},
                            {"value", piv}};
      *opt_.trace << rec.dump() << '\n';
    }
    if (out.pivots.size() % static_cast<std::size_t>(opt_.refactor_every) == 0) {
      refactor(out);
    } else {
      const Eigen::RowVectorXd prow = Binv_.row(row) / piv;
      const double bq = beta_(row) / piv;
      for (int i = 0; i < p_; ++i) {
        if (i == row || d(i) == 0.0) continue;
        Binv_.row(i) -= d(i) * prow;
        beta_(i) -= d(i) * bq;
      }
      Binv_.row(row) = prow;
      beta_(row) = bq;
    }
    return leaving;
  }

  void refactor(const LcpSolution& out) {
    Eigen::MatrixXd B(p_, p_);
    for (int c = 0; c < p_; ++c) B.col(c) = lemke_column(M_, basis_[c]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    if (!lu.isInvertible()) {
      throw NumericalError("Lemke basis became singular", out.pivots);
    }
    Binv_ = lu.inverse();
    beta_ = Binv_ * q_;
  }

  void fill_point(LcpSolution& out) const {
    out.w = Eigen::VectorXd::Zero(p_);
    out.z = Eigen::VectorXd::Zero(p_);
    out.z0 = 0.0;
    for (int i = 0; i < p_; ++i) {
      const int v = basis_[i];
      if (v == 2 * p_) {
        out.z0 = beta_(i);
      } else if (v < p_) {
        out.w(v) = beta_(i);
      } else {
        out.z(v - p_) = beta_(i);
      }
    }
  }

  LcpSolution finish_solved(LcpSolution& out) {
    if (!out.pivots.empty()) refactor(out);
    fill_point(out);
    out.status = LcpStatus::Solved;
    out.basis = ComplementaryBasis::make_unchecked(basis_, p_);
    return out;
  }

  LcpSolution finish_ray(LcpSolution& out, int entering) {
    refactor(out);
    const int z0 = 2 * p_;
    int zrow = -1;
    for (int i = 0; i < p_; ++i) {
      if (basis_[i] == z0) zrow = i;
    }
    // An artificial variable at level zero can leave in favour of either
    // member of the open complementary pair.
    if (zrow >= 0 && std::abs(beta_(zrow)) <= opt_.complementarity_tol) {
      const int other = complement_index(entering, p_);
      const Eigen::VectorXd d_other = Binv_ * lemke_column(M_, other);
      const Eigen::VectorXd d_enter = Binv_ * lemke_column(M_, entering);
      const bool use_enter = std::abs(d_enter(zrow)) >= std::abs(d_other(zrow));
      const double piv = use_enter ? d_enter(zrow) : d_other(zrow);
      if (std::abs(piv) > opt_.pivot_tol) {
        pivot(zrow, use_enter ? entering : other, out, use_enter ? d_enter : d_other);
        return finish_solved(out);
      }
    }
    fill_point(out);
    out.status = LcpStatus::Infeasible;
    out.ray_termination = true;
    return out;
  }

  const Eigen::MatrixXd& M_;
  const Eigen::VectorXd& q_;
  const LemkeOptions& opt_;
  int p_;
  std::vector<int> basis_;
  Eigen::MatrixXd Binv_;
  Eigen::VectorXd beta_;
};

}  // namespace

LcpSolution lemke_solve(const Lcp& lcp, const LemkeOptions& options) {
  LemkeRun run(lcp, options);
  return run.run();
}

TableauCoefficients transformed_coefficients(const Eigen::MatrixXd& M,
                                             const Eigen::VectorXd& q,
                                             const Eigen::MatrixXd& Q,
                                             const ComplementaryBasis& basis) {
  const int p = static_cast<int>(M.rows());
  if (basis.order() != p || q.size() != p || Q.rows() != p) {
    throw DimensionError("tableau data does not match basis order");
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(basis_matrix(M, basis.indices()));
  if (!lu.isInvertible()) throw DimensionError("basis matrix is singular");
  TableauCoefficients t;
  t.Binv = lu.inverse();
  t.Mbar = t.Binv * M;
  t.qbar = t.Binv * q;
  t.Qbar = t.Binv * Q;
  return t;
}

Eigen::MatrixXd pairwise_transform(const TableauCoefficients& coeffs,
                                   const ComplementaryBasis& basis) {
  const int p = basis.order();
  const auto& idx = basis.indices();
  Eigen::MatrixXd G(p, p);
  std::vector<int> row_of_pair(p);
  for (int r = 0; r < p; ++r) row_of_pair[idx[r] % p] = r;
  for (int j = 0; j < p; ++j) {
    // Column of the nonbasic member of pair j, moved to the right side.
    Eigen::VectorXd col = basis.contains(j) ? Eigen::VectorXd(coeffs.Mbar.col(j))
                                            : Eigen::VectorXd(-coeffs.Binv.col(j));
    for (int i = 0; i < p; ++i) G(i, j) = col(row_of_pair[i]);
  }
  return G;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> complementary_solution(
    const TableauCoefficients& coeffs, const ComplementaryBasis& basis,
    const Eigen::VectorXd& theta) {
  const int p = basis.order();
  if (theta.size() != coeffs.Qbar.cols()) {
    throw DimensionError("theta has the wrong dimension");
  }
  const Eigen::VectorXd yb = coeffs.qbar + coeffs.Qbar * theta;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(p);
  const auto& idx = basis.indices();
  for (int r = 0; r < p; ++r) {
    if (idx[r] < p) {
      w(idx[r]) = yb(r);
    } else {
      z(idx[r] - p) = yb(r);
    }
  }
  return {w, z};
}

PairPartition recover_basis_from_point(const Eigen::VectorXd& w,
                                       const Eigen::VectorXd& z, double tol) {
  if (w.size() != z.size()) throw DimensionError("w and z differ in length");
  PairPartition part;
  for (int k = 0; k < w.size(); ++k) {
    const bool wp = w(k) > tol;
    const bool zp = z(k) > tol;
    if (wp && zp) {
      std::ostringstream msg;
      msg << "pair " << k << " is not complementary (w=" << w(k)
          << ", z=" << z(k) << ")";
      throw DimensionError(msg.str());
    }
    if (wp) {
      part.W.push_back(k);
    } else if (zp) {
      part.Z.push_back(k);
    } else {
      part.D.push_back(k);
    }
  }
  return part;
}

}  // namespace crex

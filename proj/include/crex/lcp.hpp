#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "crex/errors.hpp"

namespace crex {

/// Find w, z >= 0 with w = M z + q and w'z = 0.
struct Lcp {
  Lcp(Eigen::MatrixXd M_in, Eigen::VectorXd q_in);
  int order() const { return static_cast<int>(q.size()); }

  Eigen::MatrixXd M;
  Eigen::VectorXd q;
};

/// Numerical rank from a column-pivoted QR, counting diagonal entries above
/// rel_tol times the largest one.
int numerical_rank(const Eigen::MatrixXd& X, double rel_tol = 1e-9);

/// Columns of Y = [I, -M] selected by `indices` (0..p-1 are w, p..2p-1 are z).
Eigen::MatrixXd basis_matrix(const Eigen::MatrixXd& M,
                             const std::vector<int>& indices);

/// Index into y = [w; z]. Pair k owns indices k and k + p.
inline int complement_index(int idx, int p) {
  return idx < p ? idx + p : idx - p;
}

/// A set of p indices into [w; z], one per complementary pair, whose columns
/// of [I, -M] are linearly independent. Indices are kept sorted.
class ComplementaryBasis {
 public:
  /// Validates cardinality, the one-per-pair rule and the rank condition.
  static ComplementaryBasis make(std::vector<int> indices,
                                 const Eigen::MatrixXd& M);
  /// Same checks except the rank condition.
  static ComplementaryBasis make_unchecked(std::vector<int> indices, int p);
  static ComplementaryBasis all_w(int p);

  const std::vector<int>& indices() const { return indices_; }
  int order() const { return p_; }
  bool contains(int idx) const;
  /// The basic member of pair k.
  int basic_of_pair(int k) const;
  int nonbasic_of_pair(int k) const {
    return complement_index(basic_of_pair(k), p_);
  }

  friend bool operator==(const ComplementaryBasis& a,
                         const ComplementaryBasis& b) {
    return a.p_ == b.p_ && a.indices_ == b.indices_;
  }
  friend bool operator<(const ComplementaryBasis& a,
                        const ComplementaryBasis& b) {
    return a.indices_ < b.indices_;
  }

 private:
  ComplementaryBasis(std::vector<int> indices, int p)
      : indices_(std::move(indices)), p_(p) {}
  std::vector<int> indices_;
  int p_ = 0;
};

enum class LcpStatus { Solved, Infeasible };

struct LcpSolution {
  LcpStatus status = LcpStatus::Infeasible;
  Eigen::VectorXd w;
  Eigen::VectorXd z;
  double z0 = 0.0;
  /// Set when status is Solved.
  std::optional<ComplementaryBasis> basis;
  /// Infeasible runs always end on a secondary ray; kept for reporting.
  bool ray_termination = false;
  std::vector<PivotStep> pivots;
};

struct LemkeOptions {
  double ratio_tol = 1e-9;
  double pivot_tol = 1e-11;
  double complementarity_tol = 1e-7;
  /// 0 picks a budget from the problem size.
  int max_pivots = 0;
  /// Recompute the basis inverse from scratch every this many pivots.
  int refactor_every = 25;
  /// When set, one JSON object per pivot is written here.
  std::ostream* trace = nullptr;
};

/// Lemke's complementary pivoting method with covering vector 1 and a
/// lexicographic ratio test.
LcpSolution lemke_solve(const Lcp& lcp, const LemkeOptions& options = {});

struct TableauCoefficients {
  /// B^-1 M, B^-1 q, B^-1 Q with rows ordered like basis.indices().
  Eigen::MatrixXd Mbar;
  Eigen::VectorXd qbar;
  Eigen::MatrixXd Qbar;
  Eigen::MatrixXd Binv;
};

TableauCoefficients transformed_coefficients(const Eigen::MatrixXd& M,
                                             const Eigen::VectorXd& q,
                                             const Eigen::MatrixXd& Q,
                                             const ComplementaryBasis& basis);

/// Pair-indexed map from nonbasic to basic values: for pair i,
///   y[basic(i)] = offset(i) + sum_j G(i, j) * y[nonbasic(j)].
/// Equals B^-1 M on pairs whose nonbasic member is z.
Eigen::MatrixXd pairwise_transform(const TableauCoefficients& coeffs,
                                   const ComplementaryBasis& basis);

/// (w, z) at theta for a basis: y_B = qbar + Qbar theta, y_N = 0.
std::pair<Eigen::VectorXd, Eigen::VectorXd> complementary_solution(
    const TableauCoefficients& coeffs, const ComplementaryBasis& basis,
    const Eigen::VectorXd& theta);

struct PairPartition {
  std::vector<int> W;  // w > tol, z <= tol
  std::vector<int> Z;  // z > tol, w <= tol
  std::vector<int> D;  // both <= tol
};

/// Classifies each pair of a complementary point. Throws DimensionError if
/// some pair has both members above tol.
PairPartition recover_basis_from_point(const Eigen::VectorXd& w,
                                       const Eigen::VectorXd& z,
                                       double tol = 1e-7);

}  // namespace crex

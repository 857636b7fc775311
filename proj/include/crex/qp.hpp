#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "crex/lcp.hpp"

namespace crex {

enum class VarSign { Free, Nonneg };

/// min 0.5 x'Hx + f'x  s.t.  A_in x <= b_in, A_eq x = b_eq, sign rules on x.
/// Solved through the complementarity reformulation and Lemke's method.
struct ConvexQp {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::MatrixXd A_in;
  Eigen::VectorXd b_in;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  std::vector<VarSign> signs;

  /// Empty problem in n free variables.
  static ConvexQp free_variables(int n);
  int n() const { return static_cast<int>(f.size()); }
  void add_inequality(const Eigen::RowVectorXd& a, double rhs);
  void add_equality(const Eigen::RowVectorXd& a, double rhs);
};

struct QpResult {
  Eigen::VectorXd x;
  /// Multipliers of A_in rows, then of A_eq rows (signed).
  Eigen::VectorXd lambda_in;
  Eigen::VectorXd lambda_eq;
  double objective = 0.0;
  int pivots = 0;
  /// Complementary basis of the final Lemke tableau.
  std::optional<ComplementaryBasis> basis;
};

/// Throws InfeasibleError when Lemke ends on a ray (infeasible or unbounded).
QpResult solve_qp(const ConvexQp& qp, const LemkeOptions& options = {});

}  // namespace crex

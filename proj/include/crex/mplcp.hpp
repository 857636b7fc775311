#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crex/lcp.hpp"
#include "crex/polyhedra.hpp"
#include "crex/qp.hpp"

namespace crex {

/// min_x 0.5 x'Hx + f'x  s.t.  A x <= b + C theta, sign rules on x.
struct MpQP {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd C;
  std::vector<VarSign> signs;

  int n() const { return static_cast<int>(f.size()); }
  int m() const { return static_cast<int>(b.size()); }
  int d() const { return static_cast<int>(C.cols()); }
  /// Shapes, finiteness, symmetry and positive semidefiniteness of H.
  void validate() const;
  /// The fixed-parameter problem as a ConvexQp.
  ConvexQp at(const Eigen::VectorXd& theta) const;
};

/// w = M z + q + Q theta with z = [x'; lambda], w = [mu; s].
/// Free variables appear as x = x_plus - x_minus.
struct MpLcp {
  Eigen::MatrixXd M;
  Eigen::VectorXd q;
  Eigen::MatrixXd Q;
  int n_original = 0;
  int n_split = 0;
  int m = 0;
  /// x = recovery * x' where x' are the split nonnegative variables.
  Eigen::MatrixXd recovery;

  int order() const { return static_cast<int>(q.size()); }
  int d() const { return static_cast<int>(Q.cols()); }
  Lcp at(const Eigen::VectorXd& theta) const;
  /// Original x from the z part of a solution.
  Eigen::VectorXd recover_x(const Eigen::VectorXd& z) const;
};

MpLcp to_mplcp(const MpQP& problem);

struct AffineMap {
  Eigen::MatrixXd T;
  Eigen::VectorXd k;
  Eigen::VectorXd operator()(const Eigen::VectorXd& theta) const {
    return T * theta + k;
  }
};

/// 0.5 t'Ht + f't + c.
struct QuadraticForm {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  double c = 0.0;
  double operator()(const Eigen::VectorXd& theta) const {
    return 0.5 * theta.dot(H * theta) + f.dot(theta) + c;
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const {
    return H * theta + f;
  }
};

struct CriticalRegion {
  HPolyhedron region;
  /// Basic variables (ordered like basis.indices()) as a function of theta.
  AffineMap solution_map;
  /// Original decision variables as a function of theta.
  AffineMap x_map;
  QuadraticForm vf;
  ComplementaryBasis basis = ComplementaryBasis::all_w(0);
  double chebyshev_radius = -1.0;
  bool lower_dimensional = false;
};

/// Basic variables y_B(theta) = qbar + Qbar theta.
AffineMap parametric_solution(const MpLcp& lcp, const ComplementaryBasis& basis);

/// {theta | -Qbar theta <= qbar}. Rows with no theta dependence that hold
/// trivially are dropped.
HPolyhedron critical_region(const MpLcp& lcp, const ComplementaryBasis& basis);

/// Optimal cost over the region of `basis`.
QuadraticForm value_function(const MpQP& problem, const MpLcp& lcp,
                             const ComplementaryBasis& basis);

/// Region, maps and value function of one basis.
CriticalRegion region_for_basis(const MpQP& problem, const MpLcp& lcp,
                                const ComplementaryBasis& basis);

struct KktDiagnostics {
  std::vector<int> active_rows;
  /// Active rows whose multiplier is zero (strict complementarity fails).
  std::vector<int> zero_multiplier_rows;
  double reciprocal_condition = 0.0;
};

/// Classical active-set route: solve the QP at theta, fix the active set,
/// and derive the region and value function from the KKT system. Sign
/// restrictions on x count as constraint rows m, m+1, ... in the diagnostics.
/// Throws DegenerateError if the KKT matrix is singular and
/// InfeasibleError if the QP has no solution at theta.
CriticalRegion kkt_active_set_solution(const MpQP& problem,
                                       const Eigen::VectorXd& theta,
                                       KktDiagnostics* diagnostics = nullptr);

}  // namespace crex

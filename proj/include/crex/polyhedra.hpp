#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "crex/errors.hpp"

namespace crex {

using Point = Eigen::VectorXd;

inline constexpr double kActiveTol = 1e-7;

/// {x | A x <= b}. Rows flagged as equalities mean A_i x = b_i.
class HPolyhedron {
 public:
  HPolyhedron() = default;
  HPolyhedron(Eigen::MatrixXd A, Eigen::VectorXd b,
              std::vector<bool> equality = {});
  static HPolyhedron whole_space(int dim);
  /// Box lo <= x <= hi as inequality rows.
  static HPolyhedron box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

  int dim() const { return static_cast<int>(A_.cols()); }
  int rows() const { return static_cast<int>(A_.rows()); }
  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::VectorXd& b() const { return b_; }
  const std::vector<bool>& equality() const { return eq_; }
  bool is_equality(int row) const { return eq_[row]; }

  /// Appends a_row x <= rhs (or = rhs).
  void add_row(const Eigen::RowVectorXd& a_row, double rhs, bool eq = false);
  /// Equality rows replaced by two opposite inequalities.
  std::pair<Eigen::MatrixXd, Eigen::VectorXd> as_inequalities() const;

 private:
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
  std::vector<bool> eq_;
};

bool contains(const HPolyhedron& P, const Point& x, double tol = kActiveTol);

HPolyhedron intersect(const HPolyhedron& P1, const HPolyhedron& P2);

struct VertexSet {
  std::vector<Point> vertices;
  /// Extreme rays (unit length) when P is unbounded.
  std::vector<Point> rays;
  /// False when P contains a line; no vertices are reported then.
  bool pointed = true;
};

struct VertexOptions {
  int max_dim = 12;
  double tol = 1e-7;
};

/// Exhaustive active-set vertex enumeration. Throws CapacityError when the
/// dimension exceeds options.max_dim.
VertexSet vertices(const HPolyhedron& P, const VertexOptions& options = {});

/// argmin ||theta - x0|| over P. Throws InfeasibleError if P is empty.
Point min_norm_projection(const HPolyhedron& P, const Point& x0);

/// Outward normals of rows active at x, one per column. Equality rows give
/// both signs.
Eigen::MatrixXd normal_cone_generators(const HPolyhedron& P, const Point& x,
                                       double tol_active = kActiveTol);

struct ChebyshevBall {
  Point center;
  double radius;
};

/// Largest inscribed ball, radius capped at `radius_cap` for unbounded sets.
/// Equality rows restrict the centre but not the radius.
std::optional<ChebyshevBall> chebyshev_ball(const HPolyhedron& P,
                                            double radius_cap = 1e3);

bool is_empty(const HPolyhedron& P);
/// Chebyshev centre; throws InfeasibleError when P is empty.
Point interior_point(const HPolyhedron& P);

/// Drops inequality rows implied by the others (one LP per row).
HPolyhedron remove_redundant_rows(const HPolyhedron& P, double tol = 1e-9);

}  // namespace crex

#include "crex/polyhedra.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "crex/qp.hpp"

namespace crex {

HPolyhedron::HPolyhedron(Eigen::MatrixXd A, Eigen::VectorXd b,
                         std::vector<bool> equality)
    : A_(std::move(A)), b_(std::move(b)), eq_(std::move(equality)) {
  if (A_.rows() != b_.size()) throw DimensionError("A and b row counts differ");
  if (eq_.empty()) eq_.assign(b_.size(), false);
  if (static_cast<Eigen::Index>(eq_.size()) != b_.size()) {
    throw DimensionError("equality flags must match the row count");
  }
  if (!A_.allFinite() || !b_.allFinite()) {
    throw DimensionError("polyhedron data has non-finite entries");
  }
}

HPolyhedron HPolyhedron::whole_space(int dim) {
  return HPolyhedron(Eigen::MatrixXd(0, dim), Eigen::VectorXd(0));
}

HPolyhedron HPolyhedron::box(const Eigen::VectorXd& lo,
                             const Eigen::VectorXd& hi) {
  const int n = static_cast<int>(lo.size());
  Eigen::MatrixXd A(2 * n, n);
  A << Eigen::MatrixXd::Identity(n, n), -Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b(2 * n);
  b << hi, -lo;
  return HPolyhedron(A, b);
}

void HPolyhedron::add_row(const Eigen::RowVectorXd& a_row, double rhs, bool eq) {
  if (a_row.size() != A_.cols()) throw DimensionError("row length differs from dim");
  const Eigen::Index r = A_.rows();
  A_.conservativeResize(r + 1, Eigen::NoChange);
  b_.conservativeResize(r + 1);
  A_.row(r) = a_row;
  b_(r) = rhs;
  eq_.push_back(eq);
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> HPolyhedron::as_inequalities() const {
  int extra = 0;
  for (bool e : eq_) extra += e ? 1 : 0;
  Eigen::MatrixXd A(rows() + extra, dim());
  Eigen::VectorXd b(rows() + extra);
  int r = 0;
  for (int i = 0; i < rows(); ++i) {
    A.row(r) = A_.row(i);
    b(r++) = b_(i);
    if (eq_[i]) {
      A.row(r) = -A_.row(i);
      b(r++) = -b_(i);
    }
  }
  return {A, b};
}

namespace {

double row_tol(const Eigen::RowVectorXd& a, double tol) {
  return tol * std::max(1.0, a.cwiseAbs().maxCoeff());
}

}  // namespace

bool contains(const HPolyhedron& P, const Point& x, double tol) {
  if (x.size() != P.dim()) throw DimensionError("point has the wrong dimension");
  for (int i = 0; i < P.rows(); ++i) {
    const double r = P.A().row(i).dot(x) - P.b()(i);
    const double t = row_tol(P.A().row(i), tol);
    if (r > t) return false;
    if (P.is_equality(i) && r < -t) return false;
  }
  return true;
}

HPolyhedron intersect(const HPolyhedron& P1, const HPolyhedron& P2) {
  if (P1.dim() != P2.dim()) throw DimensionError("dimension mismatch in intersect");
  Eigen::MatrixXd A(P1.rows() + P2.rows(), P1.dim());
  A << P1.A(), P2.A();
  Eigen::VectorXd b(P1.rows() + P2.rows());
  b << P1.b(), P2.b();
  std::vector<bool> eq = P1.equality();
  eq.insert(eq.end(), P2.equality().begin(), P2.equality().end());
  return HPolyhedron(A, b, eq);
}

namespace {

struct NormalizedRows {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::vector<bool> eq;
};

// Unit-norm rows, zero rows removed, parallel inequalities merged.
NormalizedRows normalize(const HPolyhedron& P, double tol, bool* empty) {
  NormalizedRows out;
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  std::vector<bool> eq;
  *empty = false;
  for (int i = 0; i < P.rows(); ++i) {
    const double nrm = P.A().row(i).norm();
    if (nrm <= 1e-12) {
      const double bi = P.b()(i);
      if (bi < -tol || (P.is_equality(i) && bi > tol)) *empty = true;
      continue;
    }
    Eigen::RowVectorXd a = P.A().row(i) / nrm;
    const double bi = P.b()(i) / nrm;
    bool merged = false;
    for (std::size_t k = 0; k < rows.size() && !P.is_equality(i); ++k) {
      if (!eq[k] && (rows[k] - a).norm() <= 1e-12) {
        rhs[k] = std::min(rhs[k], bi);
        merged = true;
        break;
      }
    }
    if (!merged) {
      rows.push_back(a);
      rhs.push_back(bi);
      eq.push_back(P.is_equality(i));
    }
  }
  out.A.resize(rows.size(), P.dim());
  out.b.resize(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.A.row(k) = rows[k];
    out.b(k) = rhs[k];
  }
  out.eq = eq;
  return out;
}

// Calls visit(subset) for every k-subset of {0..n-1} in lexicographic order.
void for_each_subset(int n, int k, const std::function<void(const std::vector<int>&)>& visit) {
  if (k > n || k < 0) return;
  std::vector<int> s(k);
  for (int i = 0; i < k; ++i) s[i] = i;
  while (true) {
    visit(s);
    int i = k - 1;
    while (i >= 0 && s[i] == n - k + i) --i;
    if (i < 0) return;
    ++s[i];
    for (int j = i + 1; j < k; ++j) s[j] = s[j - 1] + 1;
  }
}

bool push_unique(std::vector<Point>& pts, const Point& x, double tol) {
  for (const Point& y : pts) {
    if ((y - x).cwiseAbs().maxCoeff() <= tol * std::max(1.0, y.cwiseAbs().maxCoeff())) {
      return false;
    }
  }
  pts.push_back(x);
  return true;
}

}  // namespace

VertexSet vertices(const HPolyhedron& P, const VertexOptions& options) {
  const int n = P.dim();
  if (n > options.max_dim) {
    throw CapacityError("vertex enumeration dimension exceeds the cap",
                        static_cast<std::size_t>(n),
                        static_cast<std::size_t>(options.max_dim));
  }
  VertexSet out;
  bool empty = false;
  const NormalizedRows R = normalize(P, options.tol, &empty);
  if (empty) return out;
  std::vector<int> eq_rows, in_rows;
  for (int i = 0; i < static_cast<int>(R.eq.size()); ++i) {
    (R.eq[i] ? eq_rows : in_rows).push_back(i);
  }
  Eigen::MatrixXd Aeq(eq_rows.size(), n);
  Eigen::VectorXd beq(eq_rows.size());
  for (std::size_t k = 0; k < eq_rows.size(); ++k) {
    Aeq.row(k) = R.A.row(eq_rows[k]);
    beq(k) = R.b(eq_rows[k]);
  }
  const int r_eq = numerical_rank(Aeq);
  Eigen::MatrixXd all(R.A.rows(), n);
  all = R.A;
  if (numerical_rank(all) < n) {
    out.pointed = false;
    return out;
  }
  const HPolyhedron Pn(R.A, R.b, R.eq);
  const int need = n - r_eq;
  const int ni = static_cast<int>(in_rows.size());

  auto solve_active = [&](const std::vector<int>& subset, int target_rank,
                          Eigen::MatrixXd* sys, Eigen::VectorXd* rhs) {
    sys->resize(eq_rows.size() + subset.size(), n);
    rhs->resize(eq_rows.size() + subset.size());
    if (!eq_rows.empty()) {
      sys->topRows(eq_rows.size()) = Aeq;
      rhs->head(eq_rows.size()) = beq;
    }
    for (std::size_t k = 0; k < subset.size(); ++k) {
      sys->row(eq_rows.size() + k) = R.A.row(in_rows[subset[k]]);
      (*rhs)(eq_rows.size() + k) = R.b(in_rows[subset[k]]);
    }
    return numerical_rank(*sys) == target_rank;
  };

  for_each_subset(ni, need, [&](const std::vector<int>& subset) {
    Eigen::MatrixXd sys;
    Eigen::VectorXd rhs;
    if (!solve_active(subset, n, &sys, &rhs)) return;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sys);
    const Point x = qr.solve(rhs);
    if ((sys * x - rhs).cwiseAbs().maxCoeff() > options.tol * std::max(1.0, x.cwiseAbs().maxCoeff())) {
      return;
    }
    if (contains(Pn, x, options.tol)) push_unique(out.vertices, x, 1e-6);
  });

  // Extreme rays of the recession cone {A_in r <= 0, A_eq r = 0}.
  for_each_subset(ni, need - 1, [&](const std::vector<int>& subset) {
    Eigen::MatrixXd sys;
    Eigen::VectorXd rhs;
    if (!solve_active(subset, n - 1, &sys, &rhs)) return;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
    lu.setThreshold(1e-9);
    const Eigen::MatrixXd ker = lu.kernel();
    if (ker.cols() != 1) return;
    const Point dir = ker.col(0).normalized();
    for (double sgn : {1.0, -1.0}) {
      const Point r = sgn * dir;
      bool ok = true;
      for (int i : in_rows) {
        if (R.A.row(i).dot(r) > options.tol) ok = false;
      }
      if (ok) push_unique(out.rays, r, 1e-6);
    }
  });
  return out;
}

Point min_norm_projection(const HPolyhedron& P, const Point& x0) {
  if (x0.size() != P.dim()) throw DimensionError("point has the wrong dimension");
  const int n = P.dim();
  ConvexQp qp = ConvexQp::free_variables(n);
  qp.H = Eigen::MatrixXd::Identity(n, n);
  qp.f = -x0;
  for (int i = 0; i < P.rows(); ++i) {
    if (P.is_equality(i)) {
      qp.add_equality(P.A().row(i), P.b()(i));
    } else {
      qp.add_inequality(P.A().row(i), P.b()(i));
    }
  }
  return solve_qp(qp).x;
}

Eigen::MatrixXd normal_cone_generators(const HPolyhedron& P, const Point& x,
                                       double tol_active) {
  std::vector<Eigen::VectorXd> cols;
  for (int i = 0; i < P.rows(); ++i) {
    const Eigen::RowVectorXd a = P.A().row(i);
    const double r = a.dot(x) - P.b()(i);
    if (std::abs(r) <= row_tol(a, tol_active)) {
      cols.push_back(a.transpose());
      if (P.is_equality(i)) cols.push_back(-a.transpose());
    }
  }
  Eigen::MatrixXd N(P.dim(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) N.col(c) = cols[c];
  return N;
}

std::optional<ChebyshevBall> chebyshev_ball(const HPolyhedron& P,
                                            double radius_cap) {
  const int n = P.dim();
  ConvexQp qp = ConvexQp::free_variables(n + 1);
  qp.signs[n] = VarSign::Nonneg;
  qp.f(n) = -1.0;
  for (int i = 0; i < P.rows(); ++i) {
    Eigen::RowVectorXd a(n + 1);
    a.head(n) = P.A().row(i);
    const double nrm = P.A().row(i).norm();
    if (nrm <= 1e-12) {
      if (P.b()(i) < -kActiveTol || (P.is_equality(i) && P.b()(i) > kActiveTol)) {
        return std::nullopt;
      }
      continue;
    }
    if (P.is_equality(i)) {
      a(n) = 0.0;
      qp.add_equality(a, P.b()(i));
    } else {
      a(n) = nrm;
      qp.add_inequality(a, P.b()(i));
    }
  }
  qp.add_inequality(Eigen::RowVectorXd::Unit(n + 1, n), radius_cap);
  try {
    const QpResult r = solve_qp(qp);
    return ChebyshevBall{r.x.head(n), r.x(n)};
  } catch (const InfeasibleError&) {
    return std::nullopt;
  }
}

bool is_empty(const HPolyhedron& P) { return !chebyshev_ball(P).has_value(); }

Point interior_point(const HPolyhedron& P) {
  auto ball = chebyshev_ball(P);
  if (!ball) throw InfeasibleError("polyhedron is empty", 1.0, false);
  return ball->center;
}

HPolyhedron remove_redundant_rows(const HPolyhedron& P, double tol) {
  std::vector<bool> keep(P.rows(), true);
  for (int i = 0; i < P.rows(); ++i) {
    if (P.is_equality(i)) continue;
    ConvexQp qp = ConvexQp::free_variables(P.dim());
    qp.f = -P.A().row(i).transpose();
    for (int j = 0; j < P.rows(); ++j) {
      if (!keep[j]) continue;
      const double rhs = (j == i) ? P.b()(j) + 1.0 : P.b()(j);
      if (P.is_equality(j)) {
        qp.add_equality(P.A().row(j), rhs);
      } else {
        qp.add_inequality(P.A().row(j), rhs);
      }
    }
    try {
      const QpResult r = solve_qp(qp);
      if (-r.objective <= P.b()(i) + tol) keep[i] = false;
    } catch (const InfeasibleError&) {
      // Empty or unbounded along the row: keep it.
    }
  }
  HPolyhedron out = HPolyhedron::whole_space(P.dim());
  for (int i = 0; i < P.rows(); ++i) {
    if (keep[i]) out.add_row(P.A().row(i), P.b()(i), P.is_equality(i));
  }
  return out;
}

}  // namespace crex

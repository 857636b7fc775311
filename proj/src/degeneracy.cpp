#include "crex/degeneracy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace crex {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::vector<int> rows_of_pairs(const ComplementaryBasis& basis) {
  const int p = basis.order();
  std::vector<int> row(p);
  const auto& idx = basis.indices();
  for (int r = 0; r < p; ++r) row[idx[r] % p] = r;
  return row;
}

using RowKey = std::vector<double>;

std::vector<RowKey> normalized_rows(const HPolyhedron& P) {
  std::vector<RowKey> rows;
  for (int i = 0; i < P.rows(); ++i) {
    const double nrm = P.A().row(i).norm();
    RowKey key;
    if (nrm <= 1e-12) {
      key.assign(P.dim(), 0.0);
      key.push_back(P.b()(i));
    } else {
      for (int j = 0; j < P.dim(); ++j) key.push_back(P.A()(i, j) / nrm);
      key.push_back(P.b()(i) / nrm);
    }
    key.push_back(P.is_equality(i) ? 1.0 : 0.0);
    for (double& v : key) v = std::round(v * 1e9) / 1e9;
    rows.push_back(key);
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

bool close(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  if (a.size() == 0) return true;
  const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  return (a - b).cwiseAbs().maxCoeff() <= 1e-9 * scale;
}

bool same_region(const CriticalRegion& a, const CriticalRegion& b) {
  if (!close(a.x_map.T, b.x_map.T) || !close(a.x_map.k, b.x_map.k)) return false;
  if (!close(a.vf.H, b.vf.H) || !close(a.vf.f, b.vf.f)) return false;
  if (std::abs(a.vf.c - b.vf.c) > 1e-9 * std::max(1.0, std::abs(a.vf.c))) return false;
  const auto ra = normalized_rows(a.region);
  const auto rb = normalized_rows(b.region);
  if (ra.size() != rb.size()) return false;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    for (std::size_t j = 0; j < ra[i].size(); ++j) {
      if (std::abs(ra[i][j] - rb[i][j]) > 1e-9 * std::max(1.0, std::abs(ra[i][j]))) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

UniquenessVerdict uniqueness_test(const Eigen::MatrixXd& transformed,
                                  const std::vector<int>& D, double tol) {
  UniquenessVerdict v;
  if (D.empty()) return v;
  const int k = static_cast<int>(D.size());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(k + 1, k + 1);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) L(i, j) = transformed(D[i], D[j]);
    L(i, k) = -1.0;
    L(k, i) = 1.0;
  }
  Eigen::VectorXd d = Eigen::VectorXd::Zero(k + 1);
  d(k) = -1.0;
  const LcpSolution sol = lemke_solve(Lcp(L, d));
  if (sol.status != LcpStatus::Solved) {
    v.z0_star = sol.z0;
    v.kind = UniquenessVerdict::Kind::Unique;
    return v;
  }
  v.u_last = sol.z(k);
  const double scale = std::max(1.0, L.topLeftCorner(k, k).cwiseAbs().maxCoeff());
  v.kind = v.u_last > tol * scale ? UniquenessVerdict::Kind::Unique
                                  : UniquenessVerdict::Kind::NonUnique;
  return v;
}

std::vector<Eigen::VectorXd> solution_set_vertices(
    const MpLcp& lcp, const ComplementaryBasis& basis, const std::vector<int>& D,
    const Eigen::VectorXd& theta, const SolutionSetOptions& options) {
  const int p = lcp.order();
  const int k = static_cast<int>(D.size());
  const TableauCoefficients t = transformed_coefficients(lcp.M, lcp.q, lcp.Q, basis);
  const Eigen::MatrixXd G = pairwise_transform(t, basis);
  const std::vector<int> row = rows_of_pairs(basis);
  const Eigen::VectorXd yb = t.qbar + t.Qbar * theta;
  Eigen::VectorXd offset(p);
  for (int i = 0; i < p; ++i) offset(i) = yb(row[i]);

  Eigen::MatrixXd GD(p, k);
  for (int j = 0; j < k; ++j) GD.col(j) = G.col(D[j]);
  HPolyhedron Z = HPolyhedron::whole_space(k);
  for (int j = 0; j < k; ++j) Z.add_row(-Eigen::RowVectorXd::Unit(k, j), 0.0);
  for (int i = 0; i < p; ++i) {
    const double rhs = options.form == SolutionSetForm::Offset ? offset(i) : 0.0;
    Z.add_row(-GD.row(i), rhs);
  }
  Eigen::MatrixXd GDD(k, k);
  for (int i = 0; i < k; ++i) GDD.row(i) = GD.row(D[i]);
  const Eigen::MatrixXd S = GDD + GDD.transpose();
  for (int i = 0; i < k; ++i) {
    if (S.row(i).cwiseAbs().maxCoeff() > 1e-12) Z.add_row(S.row(i), 0.0, true);
  }

  const VertexSet vs = vertices(Z, VertexOptions{options.max_dim, options.tol});
  std::vector<Eigen::VectorXd> out;
  for (const Eigen::VectorXd& u : vs.vertices) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(2 * p);
    const Eigen::VectorXd basic = offset + GD * u;
    for (int i = 0; i < p; ++i) y(basis.basic_of_pair(i)) = basic(i);
    for (int j = 0; j < k; ++j) y(basis.nonbasic_of_pair(D[j])) = u(j);
    for (int i = 0; i < 2 * p; ++i) {
      if (std::abs(y(i)) <= 1e-12) y(i) = 0.0;
    }
    bool ok = y.minCoeff() >= -options.tol;
    for (int i = 0; i < p && ok; ++i) {
      const double scale = std::max(1.0, std::max(std::abs(y(i)), std::abs(y(i + p))));
      if (std::min(std::abs(y(i)), std::abs(y(i + p))) > options.tol * scale) ok = false;
    }
    if (ok) out.push_back(y);
  }
  return out;
}

BasisEnumeration enumerate_bases_for_vertex(const Eigen::MatrixXd& M,
                                            const Eigen::VectorXd& y, double tol,
                                            int max_degenerate) {
  const int p = static_cast<int>(M.rows());
  if (y.size() != 2 * p) throw DimensionError("point must have length 2p");
  BasisEnumeration out;
  out.partition = recover_basis_from_point(y.head(p), y.tail(p), tol);
  const auto& D = out.partition.D;
  if (static_cast<int>(D.size()) > max_degenerate) {
    throw CapacityError("too many degenerate pairs for basis enumeration",
                        D.size(), static_cast<std::size_t>(max_degenerate));
  }
  std::vector<int> base;
  for (int k : out.partition.W) base.push_back(k);
  for (int k : out.partition.Z) base.push_back(k + p);
  const std::size_t count = std::size_t{1} << D.size();
  out.candidates = count;
  for (std::size_t mask = 0; mask < count; ++mask) {
    std::vector<int> idx = base;
    for (std::size_t j = 0; j < D.size(); ++j) {
      idx.push_back((mask >> j) & 1U ? D[j] + p : D[j]);
    }
    std::sort(idx.begin(), idx.end());
    if (numerical_rank(basis_matrix(M, idx)) == p) {
      out.bases.push_back(ComplementaryBasis::make_unchecked(idx, p));
    }
  }
  std::sort(out.bases.begin(), out.bases.end());
  return out;
}

RegionBundle all_regions_containing(const MpQP& problem,
                                    const Eigen::VectorXd& theta,
                                    const RegionOptions& options) {
  return all_regions_containing(problem, to_mplcp(problem), theta, options);
}

RegionBundle all_regions_containing(const MpQP& problem, const MpLcp& lcp,
                                    const Eigen::VectorXd& theta,
                                    const RegionOptions& options) {
  const auto t_start = Clock::now();
  const int p = lcp.order();
  RegionBundle out;
  out.theta = theta;
  const LcpSolution sol = lemke_solve(lcp.at(theta));
  if (sol.status != LcpStatus::Solved) {
    throw InfeasibleError("problem is infeasible at theta", sol.z0,
                          sol.ray_termination);
  }
  out.w = sol.w;
  out.z = sol.z;
  out.lemke_basis = *sol.basis;
  const ComplementaryBasis& lb = out.lemke_basis;

  const TableauCoefficients t = transformed_coefficients(lcp.M, lcp.q, lcp.Q, lb);
  const Eigen::MatrixXd G = pairwise_transform(t, lb);
  const std::vector<int> row = rows_of_pairs(lb);
  const Eigen::VectorXd yb = t.qbar + t.Qbar * theta;
  for (int i = 0; i < p; ++i) {
    const int r = row[i];
    double scale = std::max(std::abs(t.qbar(r)), G.row(i).cwiseAbs().maxCoeff());
    if (t.Qbar.cols() > 0) scale = std::max(scale, t.Qbar.row(r).cwiseAbs().maxCoeff());
    scale = std::max(scale, 1e-300);
    if (std::abs(yb(r)) / scale <= options.tol) out.degenerate_pairs.push_back(i);
  }

  Eigen::VectorXd y0(2 * p);
  y0 << sol.w, sol.z;
  if (out.degenerate_pairs.empty()) {
    out.vertices.push_back(y0);
    out.candidates_per_vertex.push_back(1);
    out.bases.push_back(lb);
  } else {
    const auto t_deg = Clock::now();
    out.verdict = uniqueness_test(G, out.degenerate_pairs, options.tol);
    if (out.verdict.unique()) {
      out.vertices.push_back(y0);
    } else {
      out.vertices = solution_set_vertices(
          lcp, lb, out.degenerate_pairs, theta,
          SolutionSetOptions{options.form, options.max_vertex_dim, options.tol});
      if (out.vertices.empty()) out.vertices.push_back(y0);
    }
    std::vector<ComplementaryBasis> all{lb};
    for (const Eigen::VectorXd& y : out.vertices) {
      BasisEnumeration e =
          enumerate_bases_for_vertex(lcp.M, y, options.tol, options.max_degenerate);
      out.candidates_per_vertex.push_back(e.candidates);
      all.insert(all.end(), e.bases.begin(), e.bases.end());
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    out.bases = std::move(all);
    out.degeneracy_ms += ms_since(t_deg);
  }

  for (const ComplementaryBasis& B : out.bases) {
    const auto t_reg = Clock::now();
    CriticalRegion cr = region_for_basis(problem, lcp, B);
    int found = -1;
    for (std::size_t r = 0; r < out.regions.size() && found < 0; ++r) {
      if (same_region(out.regions[r], cr)) found = static_cast<int>(r);
    }
    if (found < 0) {
      if (options.compute_radius) {
        const auto ball = chebyshev_ball(cr.region);
        cr.chebyshev_radius = ball ? ball->radius : 0.0;
        cr.lower_dimensional = cr.chebyshev_radius <= options.flat_radius;
      }
      found = static_cast<int>(out.regions.size());
      out.regions.push_back(std::move(cr));
    }
    out.region_of_basis.push_back(found);
    if (!(B == lb)) out.degeneracy_ms += ms_since(t_reg);
  }
  out.total_ms = ms_since(t_start);
  return out;
}

}  // namespace crex

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "crex/lcp.hpp"
#include "crex/mplcp.hpp"

namespace crex {

struct UniquenessVerdict {
  enum class Kind { Unique, NonUnique };
  Kind kind = Kind::Unique;
  /// Artificial variable of the auxiliary problem at termination.
  double z0_star = 0.0;
  /// Last component of the auxiliary solution, u'Gu for a normalized u.
  double u_last = 0.0;
  bool unique() const { return kind == Kind::Unique; }
};

/// Decides whether a complementary point whose degenerate pairs are D is the
/// only solution. `transformed` is the pairwise nonbasic-to-basic map (see
/// pairwise_transform). Solves the auxiliary problem
///   u >= 0, t >= 0,  G_DD u - t 1 >= 0,  1'u - 1 >= 0  (complementary)
/// with Lemke: the point is unique when that problem is infeasible or t > tol.
UniquenessVerdict uniqueness_test(const Eigen::MatrixXd& transformed,
                                  const std::vector<int>& D, double tol = 1e-7);

enum class SolutionSetForm {
  /// Basic rows keep their offsets: G u + y_B(theta) >= 0.
  Offset,
  /// Basic rows without offsets: G u >= 0.
  Homogeneous,
};

struct SolutionSetOptions {
  SolutionSetForm form = SolutionSetForm::Offset;
  int max_dim = 12;
  double tol = 1e-7;
};

/// Vertices of the solution set near a complementary basis, each lifted to
/// y = [w; z] of length 2p.
std::vector<Eigen::VectorXd> solution_set_vertices(
    const MpLcp& lcp, const ComplementaryBasis& basis, const std::vector<int>& D,
    const Eigen::VectorXd& theta, const SolutionSetOptions& options = {});

struct BasisEnumeration {
  PairPartition partition;
  /// Number of index sets tried (2^|D|).
  std::size_t candidates = 0;
  /// Candidates that passed the rank test, sorted.
  std::vector<ComplementaryBasis> bases;
};

/// All complementary bases consistent with the point y = [w; z].
/// Throws CapacityError if |D| exceeds max_degenerate.
BasisEnumeration enumerate_bases_for_vertex(const Eigen::MatrixXd& M,
                                            const Eigen::VectorXd& y,
                                            double tol = 1e-7,
                                            int max_degenerate = 20);

struct RegionOptions {
  double tol = 1e-7;
  int max_vertex_dim = 12;
  int max_degenerate = 20;
  SolutionSetForm form = SolutionSetForm::Offset;
  /// Regions whose inscribed radius is at most this are flagged.
  double flat_radius = 1e-7;
  bool compute_radius = true;
};

struct RegionBundle {
  Eigen::VectorXd theta;
  /// Lemke point and basis at theta.
  Eigen::VectorXd w, z;
  ComplementaryBasis lemke_basis = ComplementaryBasis::all_w(0);
  /// Pairs that are degenerate at the Lemke point.
  std::vector<int> degenerate_pairs;
  UniquenessVerdict verdict;
  std::vector<Eigen::VectorXd> vertices;
  std::vector<std::size_t> candidates_per_vertex;
  std::vector<ComplementaryBasis> bases;
  /// Distinct regions. Bases that produce the same region, solution map and
  /// value function share one entry.
  std::vector<CriticalRegion> regions;
  /// regions[region_of_basis[i]] is generated by bases[i].
  std::vector<int> region_of_basis;
  double total_ms = 0.0;
  /// Time spent on steps that exist only because of degeneracy.
  double degeneracy_ms = 0.0;
};

/// Every critical region containing theta with its value function.
/// Throws InfeasibleError (carrying z0) if the problem is infeasible at theta.
RegionBundle all_regions_containing(const MpQP& problem,
                                    const Eigen::VectorXd& theta,
                                    const RegionOptions& options = {});

/// Same, reusing a precomputed reformulation of `problem`.
RegionBundle all_regions_containing(const MpQP& problem, const MpLcp& lcp,
                                    const Eigen::VectorXd& theta,
                                    const RegionOptions& options = {});

}  // namespace crex

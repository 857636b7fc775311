#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crex/degeneracy.hpp"
#include "crex/mplcp.hpp"
#include "crex/polyhedra.hpp"
#include "crex/trace.hpp"

namespace crex {

/// One area of a distributed problem: min J_i(x_i) s.t. A x_i <= b + C theta.
struct Agent {
  std::string id;
  MpQP problem;
};

struct CreConfig {
  double eps0 = 1e-2;
  double alpha = 2.0;
  double beta = 0.5;
  double eps_min = 1e-5;
  /// Objective change below this counts as "same".
  double obj_tol = 1e-4;
  double v_tol = 1e-2;
  double J_init = 1e8;
  int max_iter = 500;
  /// Region combinations solved per coordination step.
  int combination_cap = 256;
  int threads = 1;
  /// Starting point; zeros when unset. Projected onto Theta.
  std::optional<Eigen::VectorXd> theta0;
  RegionOptions regions;
};

struct LocalEvaluation {
  bool feasible = false;
  /// Artificial variable when infeasible.
  double z0 = 0.0;
  std::optional<RegionBundle> bundle;
};

/// Runs the region search for one agent at theta.
LocalEvaluation local_evaluate(const Agent& agent, const MpLcp& lcp,
                               const Eigen::VectorXd& theta,
                               const RegionOptions& options = {});
LocalEvaluation local_evaluate(const Agent& agent, const Eigen::VectorXd& theta,
                               const RegionOptions& options = {});

/// normal' theta <= rhs.
struct FeasibilityCut {
  Eigen::RowVectorXd normal;
  double rhs = 0.0;
  /// Optimal total violation of the elastic problem at the generating theta.
  double violation = 0.0;
  Eigen::VectorXd theta;
  Eigen::VectorXd multipliers;
  std::string agent;
};

/// Cut from the elastic problem min 1's s.t. A x - s <= b + C theta, s >= 0.
/// Throws std::logic_error if theta is feasible for the agent.
FeasibilityCut feasibility_cut(const Agent& agent, const Eigen::VectorXd& theta);

struct CoordinationResult {
  Eigen::VectorXd theta;
  double J = 0.0;
  /// Per-agent region index of the winning combination.
  std::vector<int> choice;
  int combinations_total = 0;
  int combinations_solved = 0;
};

/// min sum_i VF_i(theta) over Theta intersected with one region per agent,
/// over all region combinations (flagged lower-dimensional regions skipped).
/// Ties go to the lexicographically smallest theta.
CoordinationResult coordination_solve(
    const std::vector<std::vector<CriticalRegion>>& regions,
    const HPolyhedron& Theta, int combination_cap = 256);

/// Gradients of sum_i VF_i at theta for every region combination that
/// contains theta.
std::vector<Eigen::VectorXd> subgradients_at(
    const std::vector<std::vector<CriticalRegion>>& regions,
    const Eigen::VectorXd& theta, int combination_cap = 256);

struct SubgradientCertificate {
  Eigen::VectorXd v;
  Eigen::VectorXd eta;
  Eigen::VectorXd zeta;
};

/// Minimum-norm element of conv(subdiff) + cone(normals).
SubgradientCertificate subgradient_step(const std::vector<Eigen::VectorXd>& subdiff,
                                        const Eigen::MatrixXd& normals);

enum class StepCase { Better, Same, Worse };

StepCase classify_step(double J_star, double J_hat, double obj_tol);
double stepsize_update(StepCase c, double eps_prev, const CreConfig& config);

struct CreResult {
  Eigen::VectorXd theta;
  double J = 0.0;
  SubgradientCertificate certificate;
  std::vector<Eigen::VectorXd> subdiff;
  HPolyhedron Theta;
  std::vector<FeasibilityCut> cuts;
  std::vector<IterationRecord> trace;
  int iterations = 0;
  double total_ms = 0.0;
  double cre_solving_ms = 0.0;
  double degeneracy_ms = 0.0;
};

/// Critical region exploration. Throws NonConvergedError after max_iter.
CreResult run_cre(const std::vector<Agent>& agents, const HPolyhedron& Theta0,
                  const CreConfig& config = {},
                  const std::function<void(const IterationRecord&)>& on_iteration = {});

/// Rescales the parameter: theta_new = theta / factor.
std::vector<Agent> scale_parameters(const std::vector<Agent>& agents, double factor);
HPolyhedron scale_parameters(const HPolyhedron& Theta, double factor);

}  // namespace crex

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "crex/cre.hpp"

namespace crex {

struct AdmmConfig {
  double rho = 0.1;
  /// Stop when |f_P - f_D| + sum_i ||theta_i - theta||_1 falls below this.
  double tol = 1e-3;
  int max_iter = 100000;
  /// Consensus start; zeros when unset. Projected onto Theta.
  std::optional<Eigen::VectorXd> theta0;
};

struct BendersConfig {
  double f_lower0 = 0.0;
  double f_upper0 = 1e5;
  double gap_tol = 1e-3;
  int max_iter = 5000;
  std::optional<Eigen::VectorXd> theta0;
  RegionOptions regions;
};

struct BaselineResult {
  Eigen::VectorXd theta;
  /// Primal objective (ADMM) or best upper bound (Benders).
  double J = 0.0;
  /// Final convergence metric (ADMM residual or Benders gap).
  double metric = 0.0;
  int iterations = 0;
  std::vector<IterationRecord> trace;
  std::vector<FeasibilityCut> cuts;
  double total_ms = 0.0;
};

/// Consensus ADMM on local copies of the shared parameter. Throws
/// NonConvergedError after max_iter.
BaselineResult admm_run(const std::vector<Agent>& agents, const HPolyhedron& Theta,
                        const AdmmConfig& config = {},
                        const std::function<void(const IterationRecord&)>& on_iteration = {});

/// Benders decomposition with one epigraph variable per agent. Throws
/// NonConvergedError after max_iter.
BaselineResult benders_run(const std::vector<Agent>& agents, const HPolyhedron& Theta,
                           const BendersConfig& config = {},
                           const std::function<void(const IterationRecord&)>& on_iteration = {});

}  // namespace crex

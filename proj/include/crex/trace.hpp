#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crex/errors.hpp"

namespace crex {

/// One iteration of a distributed method. Shared by CRE and the baselines.
struct IterationRecord {
  std::string method;
  int k = 0;
  Eigen::VectorXd theta;
  /// Objective tracked by the method (J* for CRE, primal value for ADMM,
  /// upper bound for Benders).
  double J = 0.0;
  /// Convergence metric: ||v*|| for CRE, the residual for ADMM, the bound
  /// gap for Benders.
  double v_norm = 0.0;
  double eps_k = 0.0;
  std::vector<int> regions_per_agent;
  int cuts_added = 0;
  /// "feasibility", "better", "same", "worse" for CRE; "step" otherwise.
  std::string step;
  double wall_ms = 0.0;
  double cre_solving_ms = 0.0;
  double degeneracy_ms = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

class NonConvergedError : public Error {
 public:
  NonConvergedError(const std::string& what, std::vector<IterationRecord> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<IterationRecord>& trace() const { return trace_; }

 private:
  std::vector<IterationRecord> trace_;
};

}  // namespace crex

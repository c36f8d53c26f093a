#pragma once

#include <Eigen/Dense>

namespace tw {

/// Largest singular value by full decomposition; exact route of the dual
/// norm check.
double spectral_norm(const Eigen::MatrixXd& m);

struct PowerIterationResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  bool restarted = false;
  Eigen::VectorXd right;  // unit vector over columns
};

/// Power iteration on A^T A started from the all-ones vector, with one
/// deterministic seeded restart if the first run stagnates. Runs to a 1e-12
/// relative-change stop; the iteration cap is generous because clustered
/// singular values converge slowly.
PowerIterationResult power_iteration_norm(const Eigen::MatrixXd& m);

}  // namespace tw

#include "twoweight/linalg.hpp"

#include <cmath>
#include <random>

namespace tw {

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

namespace {

constexpr int kMaxIterations = 200000;
constexpr double kRelTol = 1e-12;

PowerIterationResult run_power(const Eigen::MatrixXd& m, Eigen::VectorXd v) {
  PowerIterationResult res;
  double norm = v.norm();
  if (norm == 0.0) return res;
  v /= norm;
  double estimate = (m * v).norm();
  for (int k = 1; k <= kMaxIterations; ++k) {
    Eigen::VectorXd next = m.transpose() * (m * v);
    const double next_norm = next.norm();
    if (next_norm == 0.0) {
      res.value = 0.0;
      res.iterations = k;
      res.converged = true;
      res.right = v;
      return res;
    }
    v = next / next_norm;
    const double new_estimate = (m * v).norm();
    const double change = std::abs(new_estimate - estimate);
    estimate = new_estimate;
    if (change <= kRelTol * std::max(estimate, 1e-300)) {
      res.value = estimate;
      res.iterations = k;
      res.converged = true;
      res.right = v;
      return res;
    }
  }
  res.value = estimate;
  res.iterations = kMaxIterations;
  res.converged = false;
  res.right = v;
  return res;
}

}  // namespace

PowerIterationResult power_iteration_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0 || m.norm() == 0.0) {
    PowerIterationResult res;
    res.converged = true;
    return res;
  }
  PowerIterationResult first = run_power(m, Eigen::VectorXd::Ones(m.cols()));
  if (first.converged) return first;
  // Stagnant start (e.g. all-ones orthogonal to the top singular space):
  // one restart from a fixed seeded vector.
  std::mt19937_64 eng(0x7157ULL);
  Eigen::VectorXd v(m.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = 2.0 * (static_cast<double>(eng() >> 11) * 0x1.0p-53) - 1.0;
  PowerIterationResult second = run_power(m, v);
  second.restarted = true;
  if (second.value < first.value) {
    first.restarted = true;
    return first;
  }
  return second;
}

}  // namespace tw

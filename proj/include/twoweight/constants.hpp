#pragma once

#include <optional>
#include <vector>

#include "twoweight/linalg.hpp"
#include "twoweight/measure.hpp"

namespace tw {

struct IntervalWitness {
  LatticeInterval interval;
  double value = 0.0;
};

struct NormEstimate {
  double value = 0.0;        // largest singular value, full decomposition
  double power_value = 0.0;  // power-iteration route
  int power_iterations = 0;
  bool power_converged = false;
  bool power_restarted = false;
  std::vector<double> right_singular;  // over sigma-atoms
  std::vector<double> left_singular;   // over w-atoms
};

/// The quantitative objects of the main theorem on one measure pair.
struct ConstantsReport {
  double a2 = 0.0;
  double testing_sw = 0.0;  // sigma direction
  double testing_ws = 0.0;  // dual direction
  double norm = 0.0;
  double h_const = 0.0;  // sqrt(a2) + max(testing_sw, testing_ws)
  double ratio = 0.0;    // norm / h_const
  IntervalWitness a2_witness;
  IntervalWitness testing_sw_witness;
  IntervalWitness testing_ws_witness;
  NormEstimate norm_detail;
};

enum class TestingDirection { SigmaToW, WToSigma };

/// Candidate sup family: lattice endpoints flanking each atom of either
/// measure, plus the domain endpoints.
std::vector<std::int64_t> candidate_endpoints(const MeasurePair& pair);

IntervalWitness a2_constant(const MeasurePair& pair);
IntervalWitness testing_constant(const MeasurePair& pair, TestingDirection direction,
                                 const TruncationWindow& win);
IntervalWitness testing_constant(const MeasurePair& pair, TestingDirection direction);

Eigen::MatrixXd transform_matrix(const MeasurePair& pair, const TruncationWindow& win);
NormEstimate norm_estimate(const MeasurePair& pair, const TruncationWindow& win);

ConstantsReport constants_report(const MeasurePair& pair);
ConstantsReport constants_report(const MeasurePair& pair, const TruncationWindow& win);

/// norm / h_const; errors when the pair is degenerate (h_const = 0).
double theorem_ratio(const ConstantsReport& report);

}  // namespace tw

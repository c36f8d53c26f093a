#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "twoweight/haar.hpp"
#include "twoweight/linalg.hpp"
#include "twoweight/measure.hpp"

namespace tw {

/// One summand index of the stopping form: q2 deeply inside q1, with the
/// child of q1 containing q2 kept alongside.
struct IntervalPair {
  DyadicInterval q1;
  DyadicInterval q2;
  DyadicInterval tilde;  // child of q1 containing q2

  auto operator<=>(const IntervalPair&) const = default;
};

/// An admissible collection of pairs over a root interval: every pair has
/// q2 deeply inside good q1, the collection is convex in q1 at fixed q2, and
/// no tilde/q2 member sits inside a forbidden (energy-stopping) interval.
class PairCollection {
 public:
  static PairCollection build(const DyadicInterval& root, const GridConfig& cfg,
                              std::vector<IntervalPair> pairs,
                              const std::vector<DyadicInterval>* forbidden = nullptr);

  const DyadicInterval& root() const { return root_; }
  const GridConfig& cfg() const { return cfg_; }
  const std::vector<IntervalPair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

  const std::set<DyadicInterval>& q1_set() const { return q1_set_; }
  const std::set<DyadicInterval>& q2_set() const { return q2_set_; }
  const std::set<DyadicInterval>& tilde_set() const { return tilde_set_; }
  /// tilde(Q_1) union Q_2, the index set of the size functional.
  const std::set<DyadicInterval>& members() const { return member_set_; }

  PairCollection subset(const std::vector<IntervalPair>& pairs) const;

 private:
  DyadicInterval root_;
  GridConfig cfg_;
  std::vector<IntervalPair> pairs_;
  std::set<DyadicInterval> q1_set_, q2_set_, tilde_set_, member_set_;
};

/// The stopping-form collection: pairs (I, J) with J deeply inside good I and
/// J not inside any member of `uniform_s`. Validates that `uniform_s` is
/// disjoint and covers the energy-stopping family.
PairCollection make_q0(const MeasurePair& pair, const DyadicInterval& root,
                       const std::vector<DyadicInterval>& uniform_s,
                       const std::vector<DyadicInterval>& energy_family);

/// Shared evaluation cache for one measure pair: the Hilbert pairings
/// <H(1_{root - hole} sigma), h^w_J>_w recur across every class of a
/// decomposition, so they are memoized per (hole, J).
class PairingCache {
 public:
  PairingCache(const MeasurePair& pair, const DyadicInterval& root, const TruncationWindow& win)
      : pair_(pair), root_(root), win_(win) {}

  const MeasurePair& pair() const { return pair_; }
  const DyadicInterval& root() const { return root_; }
  const TruncationWindow& window() const { return win_; }

  /// <H_sigma(1_{root} - 1_{hole}), h^w_J>_w; zero for degenerate J.
  double hole_pairing(const DyadicInterval& hole, const DyadicInterval& j);
  /// <H_sigma(1_{indicator}), h^w_J>_w; zero for degenerate J.
  double indicator_pairing(const DyadicInterval& indicator, const DyadicInterval& j);
  /// P(sigma restricted outside `hole`, target), memoized.
  double poisson_outside(const DyadicInterval& hole, const DyadicInterval& target);
  double coeff_x(const DyadicInterval& j);

 private:
  const MeasurePair& pair_;
  DyadicInterval root_;
  TruncationWindow win_;
  std::map<std::pair<DyadicInterval, DyadicInterval>, double> hole_;
  std::map<std::pair<DyadicInterval, DyadicInterval>, double> indicator_;
  std::map<std::pair<DyadicInterval, DyadicInterval>, double> poisson_;
  std::map<DyadicInterval, double> coeff_x_;
};

/// B_Q(f, g): sum over pairs of E^sigma_{Q2} Delta^sigma_{Q1} f times
/// <H_sigma(root - tilde), Delta^w_{Q2} g>_w.
double b_form(const PairCollection& collection, const HaarCoefficients& f,
              const HaarCoefficients& g, PairingCache& cache);

/// The three forms of the algebraic identity
///   b_above = i0_part - b_stop,
/// all summing over J deeply inside I inside root.
double b_above(const HaarCoefficients& f, const HaarCoefficients& g, PairingCache& cache);
double b_stop(const HaarCoefficients& f, const HaarCoefficients& g, PairingCache& cache);
double i0_part(const HaarCoefficients& f, const HaarCoefficients& g, PairingCache& cache);

/// Exact Haar-coordinate matrix of B_Q, indexed by splittable q1 rows and
/// splittable q2 columns.
struct FormMatrix {
  std::vector<DyadicInterval> rows;  // q1, sigma side
  std::vector<DyadicInterval> cols;  // q2, w side
  Eigen::MatrixXd matrix;

  double norm() const { return spectral_norm(matrix); }
  double apply(const HaarCoefficients& f, const HaarCoefficients& g) const;
};
FormMatrix form_matrix(const PairCollection& collection, PairingCache& cache);

struct SizeResult {
  double value = 0.0;
  std::optional<DyadicInterval> witness;
  std::vector<DyadicInterval> skipped;  // zero-sigma-mass members with positive tent
};

using TentMap = std::map<DyadicInterval, double>;

/// Tent measure over every interval: sum of <x, h^w_J>^2 for J in Q_2, J
/// inside the interval.
TentMap tent_measure(const PairCollection& collection, PairingCache& cache);

SizeResult collection_size(const PairCollection& collection, PairingCache& cache);
SizeResult collection_size(const PairCollection& collection, PairingCache& cache,
                           const TentMap& tents);

/// eta of the disjoint-holes lemma. Every pair must have an S with
/// q2 deeply inside S inside tilde; throws otherwise.
double eta_holes(const PairCollection& collection, const std::vector<DyadicInterval>& shelters,
                 PairingCache& cache);

/// eta of the enclosing-holes lemma. Every pair must have an S with
/// q2 inside S deeply inside tilde (scale gap only for the S-tilde step);
/// throws otherwise.
double eta_Holes(const PairCollection& collection, const std::vector<DyadicInterval>& shelters,
                 PairingCache& cache);

/// beta(t) of the decay estimate over the given shelter family.
double beta_t(const PairCollection& collection, const std::vector<DyadicInterval>& shelters,
              PairingCache& cache);

/// Stopping tree with averages growing by more than a factor 4 along chains.
struct StoppingData {
  std::vector<DyadicInterval> tree;
  std::map<DyadicInterval, double> alpha;

  double alpha_of(const DyadicInterval& interval) const { return alpha.at(interval); }
  /// Minimal tree member containing the interval, if any.
  std::optional<DyadicInterval> parent_of(const DyadicInterval& interval) const;
  /// Sum of alpha(F)^2 sigma(F) over the tree.
  double carleson_sum(const AtomicMeasure& sigma) const;
};
StoppingData stopping_data(const std::vector<double>& f, const AtomicMeasure& sigma,
                           const DyadicInterval& root);

/// The step function phi_J of the holes lemma, evaluated at sigma-atoms.
std::vector<double> phi_j(const PairCollection& collection, const HaarCoefficients& f,
                          const DyadicInterval& j, const MeasurePair& pair);

struct MonotonicityResult {
  double ratio = 0.0;
  bool degenerate = false;  // zero denominator, reported as 0 with a flag
};

/// |<H_sigma(1_{root - hole}), h^w_J>| over P(sigma outside hole, J) times
/// <x/|J|, h^w_J>.
MonotonicityResult monotonicity_check(const MeasurePair& pair, const DyadicInterval& hole,
                                      const DyadicInterval& j, const TruncationWindow& win);

}  // namespace tw

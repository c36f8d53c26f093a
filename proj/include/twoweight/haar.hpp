#pragma once

#include <map>
#include <set>
#include <vector>

#include "twoweight/measure.hpp"

namespace tw {

/// A function in L^2(nu) in weighted-Haar coordinates: global mean plus one
/// coefficient per interval whose two children both carry positive nu-mass.
class HaarCoefficients {
 public:
  HaarCoefficients() = default;
  explicit HaarCoefficients(double mean) : mean_(mean) {}

  double mean() const { return mean_; }
  void set_mean(double m) { mean_ = m; }

  double coefficient(const DyadicInterval& interval) const {
    auto it = coeffs_.find(interval);
    return it == coeffs_.end() ? 0.0 : it->second;
  }
  void set_coefficient(const DyadicInterval& interval, double value) {
    if (value == 0.0)
      coeffs_.erase(interval);
    else
      coeffs_[interval] = value;
  }

  const std::map<DyadicInterval, double>& coefficients() const { return coeffs_; }

  /// mean^2 * nu([0,1)) + sum of squared coefficients.
  double norm_sq(const AtomicMeasure& nu) const;

 private:
  double mean_ = 0.0;
  std::map<DyadicInterval, double> coeffs_;
};

/// Whether both children of the interval carry positive mass, i.e. whether a
/// Haar function exists there.
bool is_splittable(const AtomicMeasure& nu, const DyadicInterval& interval);

/// The constant value of h_J on one of its children. Degenerate children make
/// this ill-defined; callers guard with is_splittable.
double haar_child_value(const AtomicMeasure& nu, const DyadicInterval& interval, bool right_child);

/// h^nu_J as a vector over all atoms of nu (zero outside J).
std::vector<double> haar_function(const AtomicMeasure& nu, const DyadicInterval& interval);

HaarCoefficients expand(const std::vector<double>& values, const AtomicMeasure& nu);
std::vector<double> reconstruct(const HaarCoefficients& coeffs, const AtomicMeasure& nu);

/// nu-average of f over the interval; errors on zero mass.
double average(const std::vector<double>& values, const AtomicMeasure& nu,
               const DyadicInterval& interval);

/// Martingale difference of f through the interval, as atom values.
std::vector<double> mart_diff(const std::vector<double>& values, const AtomicMeasure& nu,
                              const DyadicInterval& interval);

/// <x, h^nu_J>: zero when J is degenerate.
double coefficient_x(const AtomicMeasure& nu, const DyadicInterval& interval);

/// E(nu, I): normalized standard deviation of position under nu restricted to
/// I, scaled by |I|. Zero on intervals of zero mass.
double energy(const AtomicMeasure& nu, const DyadicInterval& interval);

/// Sum of E^sigma_J Delta^sigma_I f over all I with J deeply inside I inside
/// root. Telescopes to a single average when the Haar support is convex.
double epsilon_j(const HaarCoefficients& f, const AtomicMeasure& sigma,
                 const DyadicInterval& interval, const DyadicInterval& root,
                 const GridConfig& cfg);

/// Zeroes all coefficients outside the set and drops the mean.
HaarCoefficients project(const HaarCoefficients& g, const std::set<DyadicInterval>& keep);

double inner_product(const std::vector<double>& a, const std::vector<double>& b,
                     const AtomicMeasure& nu);
double norm_sq(const std::vector<double>& values, const AtomicMeasure& nu);

/// Intervals containing at least `min_atoms` atoms of nu, level <= depth.
std::vector<DyadicInterval> active_intervals(const AtomicMeasure& nu, int min_atoms);

}  // namespace tw

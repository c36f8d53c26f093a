#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "twoweight/dyadic.hpp"

namespace tw {

/// Point mass sitting at the center of depth-K cell `cell`, i.e. at
/// (2*cell+1) * 2^-(K+1). Centers never hit a dyadic endpoint of scale <= K.
struct Atom {
  std::int64_t cell = 0;
  double mass = 0.0;
};

/// Half-open interval [lo*2^-depth, hi*2^-depth) with endpoints on the lattice
/// of scale `depth`. Used for the sup-families in the constants module, where
/// candidate intervals need not be dyadic.
struct LatticeInterval {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  int depth = 0;

  double left() const { return std::ldexp(static_cast<double>(lo), -depth); }
  double right() const { return std::ldexp(static_cast<double>(hi), -depth); }
  double length() const { return std::ldexp(static_cast<double>(hi - lo), -depth); }
  double distance_to(double x) const {
    if (x < left()) return left() - x;
    if (x > right()) return x - right();
    return 0.0;
  }
  static LatticeInterval from_dyadic(const DyadicInterval& interval, int depth) {
    const int shift = depth - interval.level();
    return {static_cast<std::int64_t>(interval.index()) << shift,
            static_cast<std::int64_t>(interval.index() + 1) << shift, depth};
  }
};

/// Finite positive atomic measure on [0,1) with all atoms at depth-K cell
/// centers, stored in increasing position order.
class AtomicMeasure {
 public:
  AtomicMeasure() = default;
  AtomicMeasure(int depth, std::vector<Atom> atoms);

  static AtomicMeasure empty(int depth) { return AtomicMeasure(depth, {}); }

  int depth() const { return depth_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool is_empty() const { return atoms_.empty(); }

  double position(std::size_t i) const { return positions_[i]; }
  const std::vector<double>& positions() const { return positions_; }
  double mass_at(std::size_t i) const { return atoms_[i].mass; }

  double total_mass() const;
  double mass(const DyadicInterval& interval) const;
  double mass(const LatticeInterval& interval) const;

  /// Index range [first, last) of atoms inside the interval.
  std::pair<std::size_t, std::size_t> atom_range(const DyadicInterval& interval) const;
  std::pair<std::size_t, std::size_t> atom_range(const LatticeInterval& interval) const;

  bool contains_cell(std::int64_t cell) const;

 private:
  int depth_ = 0;
  std::vector<Atom> atoms_;
  std::vector<double> positions_;
};

/// Truncation window 0 < eps < delta of the Hilbert kernel.
struct TruncationWindow {
  double eps = 0.0;
  double delta = 0.0;

  void validate() const {
    if (!(eps > 0.0 && eps < delta))
      throw std::invalid_argument("TruncationWindow: need 0 < eps < delta");
  }
  bool retains(double gap) const { return gap > eps && gap < delta; }
};

/// A weight pair (sigma, w) on a common grid: same depth, no shared atom
/// positions.
class MeasurePair {
 public:
  MeasurePair(AtomicMeasure sigma, AtomicMeasure w, GridConfig cfg);

  const AtomicMeasure& sigma() const { return sigma_; }
  const AtomicMeasure& w() const { return w_; }
  const GridConfig& cfg() const { return cfg_; }

  /// eps = half the minimal sigma-to-w atom distance, delta = 2. With this
  /// window every sigma/w atom pairing is retained, so truncated sums equal
  /// the full discrete transform.
  TruncationWindow default_window() const;

 private:
  AtomicMeasure sigma_;
  AtomicMeasure w_;
  GridConfig cfg_;
};

double poisson(const AtomicMeasure& nu, const DyadicInterval& interval);
double poisson(const AtomicMeasure& nu, const LatticeInterval& interval);

/// Poisson integral of nu restricted to [0,1) \ hole, evaluated on target.
/// Requires target inside hole.
double poisson_hole(const AtomicMeasure& nu, const DyadicInterval& hole,
                    const DyadicInterval& target);

/// Truncated Hilbert transform of nu at x (kernel 1/(y-x)). Errors when x is
/// an atom of nu.
double hilbert_truncated(const AtomicMeasure& nu, double x, const TruncationWindow& win);

/// H(1_indicator f sigma) evaluated at every w-atom.
std::vector<double> hilbert_field(const std::vector<double>& f, const MeasurePair& pair,
                                  const DyadicInterval& indicator, const TruncationWindow& win);

/// Per-atom Poisson kernel ratio bounds of the comparability estimate: for
/// J inside L with the hole measure at distance >= 2^(r(1-eps)) |L|, the ratio
/// [P(nu,J)/|J|] / [P(nu,L)/|L|] lies in [lo, hi].
struct PoissonRatioBounds {
  double lo = 0.0;
  double hi = 0.0;
};
PoissonRatioBounds poisson_ratio_bounds(const GridConfig& cfg);

}  // namespace tw

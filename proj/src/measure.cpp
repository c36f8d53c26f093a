#include "twoweight/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "twoweight/summation.hpp"

namespace tw {

std::vector<DyadicInterval> all_intervals(const GridConfig& cfg) {
  std::vector<DyadicInterval> out;
  out.reserve((std::size_t{2} << cfg.max_depth) - 1);
  for (int n = 0; n <= cfg.max_depth; ++n)
    for (std::uint64_t j = 0; j < (std::uint64_t{1} << n); ++j) out.emplace_back(n, j);
  return out;
}

AtomicMeasure::AtomicMeasure(int depth, std::vector<Atom> atoms)
    : depth_(depth), atoms_(std::move(atoms)) {
  if (depth_ < 0 || depth_ > 40) throw std::invalid_argument("AtomicMeasure: bad depth");
  const std::int64_t cells = std::int64_t{1} << depth_;
  std::int64_t prev = -1;
  positions_.reserve(atoms_.size());
  for (const Atom& a : atoms_) {
    if (a.cell < 0 || a.cell >= cells)
      throw std::invalid_argument("AtomicMeasure: atom cell outside the grid");
    if (a.cell <= prev)
      throw std::invalid_argument("AtomicMeasure: atom cells must be strictly increasing");
    if (!(a.mass > 0.0)) throw std::invalid_argument("AtomicMeasure: atom mass must be positive");
    prev = a.cell;
    positions_.push_back(std::ldexp(static_cast<double>(2 * a.cell + 1), -(depth_ + 1)));
  }
}

double AtomicMeasure::total_mass() const {
  CompensatedSum s;
  for (const Atom& a : atoms_) s.add(a.mass);
  return s.value();
}

std::pair<std::size_t, std::size_t> AtomicMeasure::atom_range(
    const DyadicInterval& interval) const {
  return atom_range(LatticeInterval::from_dyadic(interval, depth_));
}

std::pair<std::size_t, std::size_t> AtomicMeasure::atom_range(
    const LatticeInterval& interval) const {
  if (interval.depth > depth_)
    throw std::invalid_argument("atom_range: lattice finer than the measure grid");
  const int shift = depth_ + 1 - interval.depth;
  // Atom at cell k lies in the interval iff lo*2^shift <= 2k+1 < hi*2^shift.
  const std::int64_t lo = interval.lo << shift;
  const std::int64_t hi = interval.hi << shift;
  auto first = std::lower_bound(atoms_.begin(), atoms_.end(), lo,
                                [](const Atom& a, std::int64_t v) { return 2 * a.cell + 1 < v; });
  auto last = std::lower_bound(first, atoms_.end(), hi,
                               [](const Atom& a, std::int64_t v) { return 2 * a.cell + 1 < v; });
  return {static_cast<std::size_t>(first - atoms_.begin()),
          static_cast<std::size_t>(last - atoms_.begin())};
}

double AtomicMeasure::mass(const DyadicInterval& interval) const {
  return mass(LatticeInterval::from_dyadic(interval, depth_));
}

double AtomicMeasure::mass(const LatticeInterval& interval) const {
  auto [first, last] = atom_range(interval);
  CompensatedSum s;
  for (std::size_t i = first; i < last; ++i) s.add(atoms_[i].mass);
  return s.value();
}

bool AtomicMeasure::contains_cell(std::int64_t cell) const {
  return std::binary_search(atoms_.begin(), atoms_.end(), cell,
                            [](const auto& a, const auto& b) {
                              if constexpr (std::is_same_v<std::decay_t<decltype(a)>, Atom>)
                                return a.cell < b;
                              else
                                return a < b.cell;
                            });
}

MeasurePair::MeasurePair(AtomicMeasure sigma, AtomicMeasure w, GridConfig cfg)
    : sigma_(std::move(sigma)), w_(std::move(w)), cfg_(cfg) {
  cfg_.validate();
  if (sigma_.depth() != w_.depth())
    throw std::invalid_argument("MeasurePair: measures live on different grids");
  if (sigma_.depth() != cfg_.max_depth)
    throw std::invalid_argument("MeasurePair: grid config depth does not match the measures");
  for (const Atom& a : sigma_.atoms())
    if (w_.contains_cell(a.cell))
      throw std::invalid_argument("MeasurePair: sigma and w share a point mass");
}

TruncationWindow MeasurePair::default_window() const {
  double min_gap = std::numeric_limits<double>::infinity();
  for (const Atom& a : sigma_.atoms()) {
    // Nearest w-atom by cell index; cells differ by at least 1.
    auto it = std::lower_bound(w_.atoms().begin(), w_.atoms().end(), a.cell,
                               [](const Atom& b, std::int64_t v) { return b.cell < v; });
    if (it != w_.atoms().end()) min_gap = std::min<double>(min_gap, double(it->cell - a.cell));
    if (it != w_.atoms().begin()) min_gap = std::min<double>(min_gap, double(a.cell - std::prev(it)->cell));
  }
  double eps;
  if (std::isfinite(min_gap))
    eps = 0.5 * min_gap * std::ldexp(1.0, -sigma_.depth());
  else
    eps = std::ldexp(1.0, -(sigma_.depth() + 2));  // no sigma/w pairs exist at all
  return {eps, 2.0};
}

namespace {

template <typename Interval>
double poisson_impl(const AtomicMeasure& nu, const Interval& interval) {
  const double len = interval.length();
  const double len2 = len * len;
  CompensatedSum s;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    const double d = interval.distance_to(nu.position(i));
    s.add(nu.mass_at(i) * len / (len2 + d * d));
  }
  return s.value();
}

}  // namespace

double poisson(const AtomicMeasure& nu, const DyadicInterval& interval) {
  return poisson_impl(nu, interval);
}

double poisson(const AtomicMeasure& nu, const LatticeInterval& interval) {
  return poisson_impl(nu, interval);
}

double poisson_hole(const AtomicMeasure& nu, const DyadicInterval& hole,
                    const DyadicInterval& target) {
  if (!hole.contains(target))
    throw std::invalid_argument("poisson_hole: target not contained in the hole");
  auto [first, last] = nu.atom_range(hole);
  const double len = target.length();
  const double len2 = len * len;
  CompensatedSum s;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (i >= first && i < last) continue;  // restriction to the complement of the hole
    const double d = target.distance_to(nu.position(i));
    s.add(nu.mass_at(i) * len / (len2 + d * d));
  }
  return s.value();
}

double hilbert_truncated(const AtomicMeasure& nu, double x, const TruncationWindow& win) {
  win.validate();
  CompensatedSum s;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    const double y = nu.position(i);
    const double gap = std::abs(y - x);
    if (gap == 0.0)
      throw std::domain_error("hilbert_truncated: evaluation at an atom of the measure");
    if (win.retains(gap)) s.add(nu.mass_at(i) / (y - x));
  }
  return s.value();
}

std::vector<double> hilbert_field(const std::vector<double>& f, const MeasurePair& pair,
                                  const DyadicInterval& indicator, const TruncationWindow& win) {
  win.validate();
  const AtomicMeasure& sigma = pair.sigma();
  const AtomicMeasure& w = pair.w();
  if (f.size() != sigma.size())
    throw std::invalid_argument("hilbert_field: f must assign a value to every sigma-atom");
  auto [first, last] = sigma.atom_range(indicator);
  std::vector<double> out(w.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double x = w.position(i);
    CompensatedSum s;
    for (std::size_t j = first; j < last; ++j) {
      const double y = sigma.position(j);
      if (win.retains(std::abs(y - x))) s.add(f[j] * sigma.mass_at(j) / (y - x));
    }
    out[i] = s.value();
  }
  return out;
}

PoissonRatioBounds poisson_ratio_bounds(const GridConfig& cfg) {
  const double u = std::exp2(cfg.separation * (1.0 - cfg.goodness_eps));
  return {(1.0 + u * u) / (1.0 + (1.0 + u) * (1.0 + u)), 1.0 + 1.0 / (u * u)};
}

}  // namespace tw

#include "twoweight/haar.hpp"

#include <algorithm>
#include <cmath>

#include "twoweight/summation.hpp"

namespace tw {

double HaarCoefficients::norm_sq(const AtomicMeasure& nu) const {
  CompensatedSum s;
  s.add(mean_ * mean_ * nu.total_mass());
  for (const auto& [interval, c] : coeffs_) s.add(c * c);
  return s.value();
}

bool is_splittable(const AtomicMeasure& nu, const DyadicInterval& interval) {
  if (interval.level() >= nu.depth()) return false;
  return nu.mass(interval.left_child()) > 0.0 && nu.mass(interval.right_child()) > 0.0;
}

double haar_child_value(const AtomicMeasure& nu, const DyadicInterval& interval, bool right_child) {
  const double m_left = nu.mass(interval.left_child());
  const double m_right = nu.mass(interval.right_child());
  const double scale = std::sqrt(m_left * m_right / (m_left + m_right));
  return right_child ? scale / m_right : -scale / m_left;
}

std::vector<double> haar_function(const AtomicMeasure& nu, const DyadicInterval& interval) {
  if (!is_splittable(nu, interval))
    throw std::domain_error("haar_function: a child of the interval has zero mass");
  std::vector<double> out(nu.size(), 0.0);
  const double left_value = haar_child_value(nu, interval, false);
  const double right_value = haar_child_value(nu, interval, true);
  auto [first, last] = nu.atom_range(interval.left_child());
  for (std::size_t i = first; i < last; ++i) out[i] = left_value;
  auto [rfirst, rlast] = nu.atom_range(interval.right_child());
  for (std::size_t i = rfirst; i < rlast; ++i) out[i] = right_value;
  return out;
}

namespace {

void expand_rec(const std::vector<double>& values, const AtomicMeasure& nu,
                const DyadicInterval& interval, std::size_t first, std::size_t last,
                HaarCoefficients& out) {
  if (last - first < 2 || interval.level() >= nu.depth()) return;
  const DyadicInterval left = interval.left_child();
  auto [lfirst, llast] = nu.atom_range(left);
  const std::size_t mid = llast;
  if (first < mid && mid < last) {
    CompensatedSum s;
    const double lv = haar_child_value(nu, interval, false);
    const double rv = haar_child_value(nu, interval, true);
    for (std::size_t i = first; i < mid; ++i) s.add(values[i] * lv * nu.mass_at(i));
    for (std::size_t i = mid; i < last; ++i) s.add(values[i] * rv * nu.mass_at(i));
    out.set_coefficient(interval, s.value());
  }
  expand_rec(values, nu, left, first, mid, out);
  expand_rec(values, nu, interval.right_child(), mid, last, out);
}

}  // namespace

HaarCoefficients expand(const std::vector<double>& values, const AtomicMeasure& nu) {
  if (values.size() != nu.size())
    throw std::invalid_argument("expand: value count does not match atom count");
  HaarCoefficients out;
  if (nu.is_empty()) return out;
  CompensatedSum integral;
  for (std::size_t i = 0; i < nu.size(); ++i) integral.add(values[i] * nu.mass_at(i));
  out.set_mean(integral.value() / nu.total_mass());
  expand_rec(values, nu, DyadicInterval::root(), 0, nu.size(), out);
  return out;
}

std::vector<double> reconstruct(const HaarCoefficients& coeffs, const AtomicMeasure& nu) {
  std::vector<double> out(nu.size(), coeffs.mean());
  for (const auto& [interval, c] : coeffs.coefficients()) {
    if (c == 0.0) continue;
    const double lv = c * haar_child_value(nu, interval, false);
    const double rv = c * haar_child_value(nu, interval, true);
    auto [lfirst, llast] = nu.atom_range(interval.left_child());
    for (std::size_t i = lfirst; i < llast; ++i) out[i] += lv;
    auto [rfirst, rlast] = nu.atom_range(interval.right_child());
    for (std::size_t i = rfirst; i < rlast; ++i) out[i] += rv;
  }
  return out;
}

double average(const std::vector<double>& values, const AtomicMeasure& nu,
               const DyadicInterval& interval) {
  auto [first, last] = nu.atom_range(interval);
  CompensatedSum num, den;
  for (std::size_t i = first; i < last; ++i) {
    num.add(values[i] * nu.mass_at(i));
    den.add(nu.mass_at(i));
  }
  if (!(den.value() > 0.0)) throw std::domain_error("average: interval carries no mass");
  return num.value() / den.value();
}

std::vector<double> mart_diff(const std::vector<double>& values, const AtomicMeasure& nu,
                              const DyadicInterval& interval) {
  std::vector<double> out(nu.size(), 0.0);
  auto [first, last] = nu.atom_range(interval);
  if (first == last) return out;
  const double parent_avg = average(values, nu, interval);
  for (const DyadicInterval& child : {interval.left_child(), interval.right_child()}) {
    auto [cfirst, clast] = nu.atom_range(child);
    if (cfirst == clast) continue;
    const double child_avg = average(values, nu, child);
    for (std::size_t i = cfirst; i < clast; ++i) out[i] = child_avg - parent_avg;
  }
  return out;
}

double coefficient_x(const AtomicMeasure& nu, const DyadicInterval& interval) {
  if (!is_splittable(nu, interval)) return 0.0;
  const double lv = haar_child_value(nu, interval, false);
  const double rv = haar_child_value(nu, interval, true);
  CompensatedSum s;
  auto [lfirst, llast] = nu.atom_range(interval.left_child());
  for (std::size_t i = lfirst; i < llast; ++i) s.add(nu.position(i) * lv * nu.mass_at(i));
  auto [rfirst, rlast] = nu.atom_range(interval.right_child());
  for (std::size_t i = rfirst; i < rlast; ++i) s.add(nu.position(i) * rv * nu.mass_at(i));
  return s.value();
}

double energy(const AtomicMeasure& nu, const DyadicInterval& interval) {
  auto [first, last] = nu.atom_range(interval);
  if (first == last) return 0.0;
  CompensatedSum mass_sum, moment;
  for (std::size_t i = first; i < last; ++i) {
    mass_sum.add(nu.mass_at(i));
    moment.add(nu.position(i) * nu.mass_at(i));
  }
  const double total = mass_sum.value();
  if (!(total > 0.0)) return 0.0;
  const double barycenter = moment.value() / total;
  const double len = interval.length();
  CompensatedSum var;
  for (std::size_t i = first; i < last; ++i) {
    const double d = (nu.position(i) - barycenter) / len;
    var.add(nu.mass_at(i) * d * d);
  }
  return std::sqrt(var.value() / total);
}

double epsilon_j(const HaarCoefficients& f, const AtomicMeasure& sigma,
                 const DyadicInterval& interval, const DyadicInterval& root,
                 const GridConfig& cfg) {
  if (!root.contains(interval)) throw std::invalid_argument("epsilon_j: interval outside root");
  if (!is_good(interval, cfg)) return 0.0;
  CompensatedSum s;
  for (int level = root.level(); level <= interval.level() - cfg.separation; ++level) {
    const DyadicInterval anc = interval.ancestor(level);
    const double c = f.coefficient(anc);
    if (c == 0.0) continue;
    const DyadicInterval towards = interval.ancestor(level + 1);
    const bool right = towards.index() & 1;
    s.add(c * haar_child_value(sigma, anc, right));
  }
  return s.value();
}

HaarCoefficients project(const HaarCoefficients& g, const std::set<DyadicInterval>& keep) {
  HaarCoefficients out;
  for (const auto& [interval, c] : g.coefficients())
    if (keep.count(interval)) out.set_coefficient(interval, c);
  return out;
}

double inner_product(const std::vector<double>& a, const std::vector<double>& b,
                     const AtomicMeasure& nu) {
  CompensatedSum s;
  for (std::size_t i = 0; i < nu.size(); ++i) s.add(a[i] * b[i] * nu.mass_at(i));
  return s.value();
}

double norm_sq(const std::vector<double>& values, const AtomicMeasure& nu) {
  return inner_product(values, values, nu);
}

std::vector<DyadicInterval> active_intervals(const AtomicMeasure& nu, int min_atoms) {
  std::vector<DyadicInterval> out;
  std::vector<DyadicInterval> stack{DyadicInterval::root()};
  while (!stack.empty()) {
    const DyadicInterval interval = stack.back();
    stack.pop_back();
    auto [first, last] = nu.atom_range(interval);
    if (last - first < static_cast<std::size_t>(min_atoms)) continue;
    out.push_back(interval);
    if (interval.level() < nu.depth()) {
      stack.push_back(interval.right_child());
      stack.push_back(interval.left_child());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace tw

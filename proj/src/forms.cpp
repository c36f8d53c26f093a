#include "twoweight/forms.hpp"

#include <algorithm>
#include <cmath>

#include "twoweight/summation.hpp"

namespace tw {

namespace {

bool inside_any(const DyadicInterval& interval, const std::set<DyadicInterval>& family) {
  for (int level = interval.level(); level >= 0; --level)
    if (family.count(interval.ancestor(level))) return true;
  return false;
}

}  // namespace

PairCollection PairCollection::build(const DyadicInterval& root, const GridConfig& cfg,
                                     std::vector<IntervalPair> pairs,
                                     const std::vector<DyadicInterval>* forbidden) {
  PairCollection out;
  out.root_ = root;
  out.cfg_ = cfg;
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  for (const IntervalPair& p : pairs) {
    if (!root.contains(p.q1)) throw std::invalid_argument("PairCollection: q1 outside the root");
    if (!deeply_contained(p.q2, p.q1, cfg))
      throw std::invalid_argument("PairCollection: q2 not deeply inside q1");
    if (!is_good(p.q1, cfg)) throw std::invalid_argument("PairCollection: q1 not good");
    if (p.tilde != child_containing(p.q1, p.q2))
      throw std::invalid_argument("PairCollection: tilde is not the child of q1 containing q2");
    out.q1_set_.insert(p.q1);
    out.q2_set_.insert(p.q2);
    out.tilde_set_.insert(p.tilde);
  }
  out.member_set_ = out.tilde_set_;
  out.member_set_.insert(out.q2_set_.begin(), out.q2_set_.end());

  if (forbidden) {
    std::set<DyadicInterval> fset(forbidden->begin(), forbidden->end());
    for (const DyadicInterval& k : out.member_set_)
      if (inside_any(k, fset))
        throw std::invalid_argument(
            "PairCollection: member contained in an energy stopping interval");
  }

  // Convexity in q1 at fixed q2: all q1 over one q2 lie on the ancestor chain
  // of q2, so membership must hold at every good level between the extremes.
  std::map<DyadicInterval, std::set<int>> levels_by_q2;
  for (const IntervalPair& p : pairs) levels_by_q2[p.q2].insert(p.q1.level());
  for (const auto& [q2, levels] : levels_by_q2) {
    const int lo = *levels.begin();
    const int hi = *levels.rbegin();
    for (int level = lo + 1; level < hi; ++level) {
      if (!is_good(q2.ancestor(level), cfg)) continue;
      if (!levels.count(level))
        throw std::invalid_argument("PairCollection: convexity in q1 violated");
    }
  }

  out.pairs_ = std::move(pairs);
  return out;
}

PairCollection PairCollection::subset(const std::vector<IntervalPair>& pairs) const {
  return build(root_, cfg_, pairs, nullptr);
}

PairCollection make_q0(const MeasurePair& pair, const DyadicInterval& root,
                       const std::vector<DyadicInterval>& uniform_s,
                       const std::vector<DyadicInterval>& energy_family) {
  const GridConfig& cfg = pair.cfg();
  std::set<DyadicInterval> shelter_set(uniform_s.begin(), uniform_s.end());
  for (const DyadicInterval& s : shelter_set) {
    if (!root.contains(s)) throw std::invalid_argument("make_q0: shelter outside the root");
    for (const DyadicInterval& other : shelter_set)
      if (s != other && s.contains(other))
        throw std::invalid_argument("make_q0: shelters are not disjoint");
  }
  for (const DyadicInterval& f : energy_family)
    if (!inside_any(f, shelter_set))
      throw std::invalid_argument("make_q0: an energy stopping interval escapes the shelters");

  std::vector<IntervalPair> pairs;
  std::vector<DyadicInterval> stack{root};
  while (!stack.empty()) {
    const DyadicInterval j = stack.back();
    stack.pop_back();
    if (j.level() < cfg.max_depth) {
      stack.push_back(j.right_child());
      stack.push_back(j.left_child());
    }
    if (!is_good(j, cfg) || inside_any(j, shelter_set)) continue;
    for (int level = root.level(); level <= j.level() - cfg.separation; ++level) {
      const DyadicInterval q1 = j.ancestor(level);
      if (!is_good(q1, cfg)) continue;
      pairs.push_back({q1, j, j.ancestor(level + 1)});
    }
  }
  return PairCollection::build(root, cfg, std::move(pairs), &energy_family);
}

double PairingCache::hole_pairing(const DyadicInterval& hole, const DyadicInterval& j) {
  const auto key = std::make_pair(hole, j);
  auto it = hole_.find(key);
  if (it != hole_.end()) return it->second;
  const AtomicMeasure& sigma = pair_.sigma();
  const AtomicMeasure& w = pair_.w();
  double value = 0.0;
  if (is_splittable(w, j)) {
    auto [rfirst, rlast] = sigma.atom_range(root_);
    auto [hfirst, hlast] = sigma.atom_range(hole);
    CompensatedSum total;
    for (const bool right_side : {false, true}) {
      const DyadicInterval child = right_side ? j.right_child() : j.left_child();
      const double hv = haar_child_value(w, j, right_side);
      auto [wfirst, wlast] = w.atom_range(child);
      for (std::size_t i = wfirst; i < wlast; ++i) {
        const double x = w.position(i);
        CompensatedSum h;
        for (std::size_t k = rfirst; k < rlast; ++k) {
          if (k >= hfirst && k < hlast) continue;
          const double y = sigma.position(k);
          if (win_.retains(std::abs(y - x))) h.add(sigma.mass_at(k) / (y - x));
        }
        total.add(w.mass_at(i) * hv * h.value());
      }
    }
    value = total.value();
  }
  hole_.emplace(key, value);
  return value;
}

double PairingCache::indicator_pairing(const DyadicInterval& indicator, const DyadicInterval& j) {
  const auto key = std::make_pair(indicator, j);
  auto it = indicator_.find(key);
  if (it != indicator_.end()) return it->second;
  const AtomicMeasure& sigma = pair_.sigma();
  const AtomicMeasure& w = pair_.w();
  double value = 0.0;
  if (is_splittable(w, j)) {
    auto [sfirst, slast] = sigma.atom_range(indicator);
    CompensatedSum total;
    for (const bool right_side : {false, true}) {
      const DyadicInterval child = right_side ? j.right_child() : j.left_child();
      const double hv = haar_child_value(w, j, right_side);
      auto [wfirst, wlast] = w.atom_range(child);
      for (std::size_t i = wfirst; i < wlast; ++i) {
        const double x = w.position(i);
        CompensatedSum h;
        for (std::size_t k = sfirst; k < slast; ++k) {
          const double y = sigma.position(k);
          if (win_.retains(std::abs(y - x))) h.add(sigma.mass_at(k) / (y - x));
        }
        total.add(w.mass_at(i) * hv * h.value());
      }
    }
    value = total.value();
  }
  indicator_.emplace(key, value);
  return value;
}

double PairingCache::poisson_outside(const DyadicInterval& hole, const DyadicInterval& target) {
  const auto key = std::make_pair(hole, target);
  auto it = poisson_.find(key);
  if (it != poisson_.end()) return it->second;
  const double value = poisson_hole(pair_.sigma(), hole, target);
  poisson_.emplace(key, value);
  return value;
}

double PairingCache::coeff_x(const DyadicInterval& j) {
  auto it = coeff_x_.find(j);
  if (it != coeff_x_.end()) return it->second;
  const double value = coefficient_x(pair_.w(), j);
  coeff_x_.emplace(j, value);
  return value;
}

namespace {

/// E^sigma_{Q2} Delta^sigma_{Q1} f: the constant value of the martingale
/// difference on the child of q1 containing q2.
double f_side(const HaarCoefficients& f, const AtomicMeasure& sigma, const IntervalPair& p) {
  const double c = f.coefficient(p.q1);
  if (c == 0.0 || !is_splittable(sigma, p.q1)) return 0.0;
  return c * haar_child_value(sigma, p.q1, p.tilde.index() & 1);
}

}  // namespace

double b_form(const PairCollection& collection, const HaarCoefficients& f,
              const HaarCoefficients& g, PairingCache& cache) {
  const AtomicMeasure& sigma = cache.pair().sigma();
  CompensatedSum total;
  for (const IntervalPair& p : collection.pairs()) {
    const double a = f_side(f, sigma, p);
    if (a == 0.0) continue;
    const double cg = g.coefficient(p.q2);
    if (cg == 0.0) continue;
    total.add(a * cg * cache.hole_pairing(p.tilde, p.q2));
  }
  return total.value();
}

namespace {

enum class AboveKind { Indicator, Hole };

double b_above_stop_impl(const HaarCoefficients& f, const HaarCoefficients& g,
                         PairingCache& cache, AboveKind kind) {
  const GridConfig& cfg = cache.pair().cfg();
  const AtomicMeasure& sigma = cache.pair().sigma();
  const DyadicInterval root = cache.root();
  CompensatedSum total;
  for (const auto& [j, cg] : g.coefficients()) {
    if (cg == 0.0 || !root.contains(j) || !is_good(j, cfg)) continue;
    for (int level = root.level(); level <= j.level() - cfg.separation; ++level) {
      const DyadicInterval q1 = j.ancestor(level);
      const double cf = f.coefficient(q1);
      if (cf == 0.0 || !is_splittable(sigma, q1)) continue;
      const DyadicInterval towards = j.ancestor(level + 1);
      const double a = cf * haar_child_value(sigma, q1, towards.index() & 1);
      const double pairing = kind == AboveKind::Indicator ? cache.indicator_pairing(towards, j)
                                                          : cache.hole_pairing(towards, j);
      total.add(a * cg * pairing);
    }
  }
  return total.value();
}

}  // namespace

double b_above(const HaarCoefficients& f, const HaarCoefficients& g, PairingCache& cache) {
  return b_above_stop_impl(f, g, cache, AboveKind::Indicator);
}

double b_stop(const HaarCoefficients& f, const HaarCoefficients& g, PairingCache& cache) {
  return b_above_stop_impl(f, g, cache, AboveKind::Hole);
}

double i0_part(const HaarCoefficients& f, const HaarCoefficients& g, PairingCache& cache) {
  const GridConfig& cfg = cache.pair().cfg();
  const DyadicInterval root = cache.root();
  CompensatedSum total;
  for (const auto& [j, cg] : g.coefficients()) {
    if (cg == 0.0 || !root.contains(j) || !is_good(j, cfg)) continue;
    const double eps = epsilon_j(f, cache.pair().sigma(), j, root, cfg);
    if (eps == 0.0) continue;
    total.add(eps * cg * cache.indicator_pairing(root, j));
  }
  return total.value();
}

double FormMatrix::apply(const HaarCoefficients& f, const HaarCoefficients& g) const {
  Eigen::VectorXd fv(rows.size()), gv(cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) fv(i) = f.coefficient(rows[i]);
  for (std::size_t i = 0; i < cols.size(); ++i) gv(i) = g.coefficient(cols[i]);
  if (matrix.size() == 0) return 0.0;
  return fv.transpose() * matrix * gv;
}

FormMatrix form_matrix(const PairCollection& collection, PairingCache& cache) {
  const AtomicMeasure& sigma = cache.pair().sigma();
  const AtomicMeasure& w = cache.pair().w();
  FormMatrix out;
  std::map<DyadicInterval, std::size_t> row_of, col_of;
  for (const DyadicInterval& q1 : collection.q1_set())
    if (is_splittable(sigma, q1)) {
      row_of.emplace(q1, out.rows.size());
      out.rows.push_back(q1);
    }
  for (const DyadicInterval& q2 : collection.q2_set())
    if (is_splittable(w, q2)) {
      col_of.emplace(q2, out.cols.size());
      out.cols.push_back(q2);
    }
  out.matrix = Eigen::MatrixXd::Zero(out.rows.size(), out.cols.size());
  for (const IntervalPair& p : collection.pairs()) {
    auto r = row_of.find(p.q1);
    auto c = col_of.find(p.q2);
    if (r == row_of.end() || c == col_of.end()) continue;
    out.matrix(r->second, c->second) +=
        haar_child_value(sigma, p.q1, p.tilde.index() & 1) * cache.hole_pairing(p.tilde, p.q2);
  }
  return out;
}

TentMap tent_measure(const PairCollection& collection, PairingCache& cache) {
  TentMap tents;
  const int root_level = collection.root().level();
  for (const DyadicInterval& j : collection.q2_set()) {
    const double c = cache.coeff_x(j);
    if (c == 0.0) continue;
    for (int level = j.level(); level >= root_level; --level) tents[j.ancestor(level)] += c * c;
  }
  return tents;
}

SizeResult collection_size(const PairCollection& collection, PairingCache& cache) {
  const TentMap tents = tent_measure(collection, cache);
  return collection_size(collection, cache, tents);
}

SizeResult collection_size(const PairCollection& collection, PairingCache& cache,
                           const TentMap& tents) {
  const AtomicMeasure& sigma = cache.pair().sigma();
  SizeResult out;
  double best_sq = 0.0;
  for (const DyadicInterval& k : collection.members()) {
    auto it = tents.find(k);
    const double tent = it == tents.end() ? 0.0 : it->second;
    const double mass = sigma.mass(k);
    if (!(mass > 0.0)) {
      if (tent > 0.0) out.skipped.push_back(k);
      continue;
    }
    if (tent == 0.0) continue;
    const double p = cache.poisson_outside(k, k);
    const double len = k.length();
    const double value_sq = p * p * tent / (mass * len * len);
    if (value_sq > best_sq) {
      best_sq = value_sq;
      out.witness = k;
    }
  }
  out.value = std::sqrt(best_sq);
  return out;
}

namespace {

std::optional<DyadicInterval> shelter_of(const DyadicInterval& interval,
                                         const std::set<DyadicInterval>& shelters) {
  for (int level = interval.level(); level >= 0; --level) {
    const DyadicInterval anc = interval.ancestor(level);
    if (shelters.count(anc)) return anc;
  }
  return std::nullopt;
}

void check_disjoint(const std::vector<DyadicInterval>& family, const char* who) {
  for (std::size_t i = 0; i < family.size(); ++i)
    for (std::size_t j = 0; j < family.size(); ++j)
      if (i != j && family[i].contains(family[j]))
        throw std::invalid_argument(std::string(who) + ": shelters are not pairwise disjoint");
}

}  // namespace

double eta_holes(const PairCollection& collection, const std::vector<DyadicInterval>& shelters,
                 PairingCache& cache) {
  check_disjoint(shelters, "eta_holes");
  const std::set<DyadicInterval> shelter_set(shelters.begin(), shelters.end());
  const GridConfig& cfg = collection.cfg();
  for (const IntervalPair& p : collection.pairs()) {
    auto s = shelter_of(p.q2, shelter_set);
    if (!s || !deeply_contained(p.q2, *s, cfg) || !p.tilde.contains(*s))
      throw std::invalid_argument("eta_holes: a pair lacks its shelter");
  }
  const AtomicMeasure& sigma = cache.pair().sigma();
  double best_sq = 0.0;
  for (const DyadicInterval& s : shelter_set) {
    const double mass = sigma.mass(s);
    if (!(mass > 0.0)) continue;
    CompensatedSum sum;
    for (const DyadicInterval& j : collection.q2_set()) {
      if (!deeply_contained(j, s, cfg)) continue;
      const double term = cache.poisson_outside(s, j) * cache.coeff_x(j) / j.length();
      sum.add(term * term);
    }
    best_sq = std::max(best_sq, sum.value() / mass);
  }
  return std::sqrt(best_sq);
}

double eta_Holes(const PairCollection& collection, const std::vector<DyadicInterval>& shelters,
                 PairingCache& cache) {
  check_disjoint(shelters, "eta_Holes");
  const std::set<DyadicInterval> shelter_set(shelters.begin(), shelters.end());
  const int r = collection.cfg().separation;
  for (const IntervalPair& p : collection.pairs()) {
    auto s = shelter_of(p.q2, shelter_set);
    if (!s || !scale_contained(*s, p.tilde, r))
      throw std::invalid_argument("eta_Holes: a pair lacks its shelter");
  }
  const AtomicMeasure& sigma = cache.pair().sigma();
  const TentMap tents = tent_measure(collection, cache);
  double best_sq = 0.0;
  for (const DyadicInterval& s : shelter_set) {
    const double mass = sigma.mass(s);
    if (!(mass > 0.0)) continue;
    auto it = tents.find(s);
    const double tent = it == tents.end() ? 0.0 : it->second;
    if (tent == 0.0) continue;
    // Minimal tilde-member containing s.
    std::optional<DyadicInterval> pi;
    for (int level = s.level(); level >= collection.root().level(); --level) {
      const DyadicInterval anc = s.ancestor(level);
      if (collection.tilde_set().count(anc)) {
        pi = anc;
        break;
      }
    }
    if (!pi) throw std::invalid_argument("eta_Holes: shelter not covered by any tilde member");
    const double p = cache.poisson_outside(*pi, s);
    const double len = s.length();
    best_sq = std::max(best_sq, p * p * tent / (mass * len * len));
  }
  return std::sqrt(best_sq);
}

double beta_t(const PairCollection& collection, const std::vector<DyadicInterval>& shelters,
              PairingCache& cache) {
  const AtomicMeasure& sigma = cache.pair().sigma();
  const GridConfig& cfg = collection.cfg();
  double best_sq = 0.0;
  for (const DyadicInterval& k : shelters) {
    const double mass = sigma.mass(k);
    if (!(mass > 0.0)) continue;
    CompensatedSum sum;
    for (const DyadicInterval& j : collection.q2_set()) {
      if (!deeply_contained(j, k, cfg)) continue;
      const double term = cache.poisson_outside(k, j) * cache.coeff_x(j) / j.length();
      sum.add(term * term);
    }
    best_sq = std::max(best_sq, sum.value() / mass);
  }
  return std::sqrt(best_sq);
}

std::optional<DyadicInterval> StoppingData::parent_of(const DyadicInterval& interval) const {
  const std::set<DyadicInterval> members(tree.begin(), tree.end());
  for (int level = interval.level(); level >= 0; --level) {
    const DyadicInterval anc = interval.ancestor(level);
    if (members.count(anc)) return anc;
  }
  return std::nullopt;
}

double StoppingData::carleson_sum(const AtomicMeasure& sigma) const {
  CompensatedSum s;
  for (const DyadicInterval& f : tree) {
    const double a = alpha.at(f);
    s.add(a * a * sigma.mass(f));
  }
  return s.value();
}

namespace {

double average_abs(const std::vector<double>& f, const AtomicMeasure& sigma,
                   const DyadicInterval& interval) {
  auto [first, last] = sigma.atom_range(interval);
  CompensatedSum num, den;
  for (std::size_t i = first; i < last; ++i) {
    num.add(std::abs(f[i]) * sigma.mass_at(i));
    den.add(sigma.mass_at(i));
  }
  return num.value() / den.value();
}

void stopping_rec(const std::vector<double>& f, const AtomicMeasure& sigma,
                  const DyadicInterval& interval, double threshold_alpha, StoppingData& out) {
  if (interval.level() >= sigma.depth()) return;
  for (const DyadicInterval& child : {interval.left_child(), interval.right_child()}) {
    auto [first, last] = sigma.atom_range(child);
    if (first == last) continue;
    const double a = average_abs(f, sigma, child);
    if (a > 4.0 * threshold_alpha) {
      out.tree.push_back(child);
      out.alpha[child] = a;
      stopping_rec(f, sigma, child, a, out);
    } else {
      stopping_rec(f, sigma, child, threshold_alpha, out);
    }
  }
}

}  // namespace

StoppingData stopping_data(const std::vector<double>& f, const AtomicMeasure& sigma,
                           const DyadicInterval& root) {
  if (!(sigma.mass(root) > 0.0)) throw std::domain_error("stopping_data: root carries no mass");
  if (f.size() != sigma.size())
    throw std::invalid_argument("stopping_data: value count does not match atom count");
  StoppingData out;
  out.tree.push_back(root);
  out.alpha[root] = average_abs(f, sigma, root);
  stopping_rec(f, sigma, root, out.alpha[root], out);
  std::sort(out.tree.begin(), out.tree.end());
  return out;
}

std::vector<double> phi_j(const PairCollection& collection, const HaarCoefficients& f,
                          const DyadicInterval& j, const MeasurePair& pair) {
  const AtomicMeasure& sigma = pair.sigma();
  std::vector<double> out(sigma.size(), 0.0);
  for (const IntervalPair& p : collection.pairs()) {
    if (p.q2 != j) continue;
    const double a = f_side(f, sigma, p);
    if (a == 0.0) continue;
    auto [first, last] = sigma.atom_range(p.tilde);
    for (std::size_t i = 0; i < sigma.size(); ++i)
      if (i < first || i >= last) out[i] += a;
  }
  return out;
}

MonotonicityResult monotonicity_check(const MeasurePair& pair, const DyadicInterval& hole,
                                      const DyadicInterval& j, const TruncationWindow& win) {
  if (!hole.contains(j)) throw std::invalid_argument("monotonicity_check: j outside the hole");
  MonotonicityResult out;
  if (!is_splittable(pair.w(), j)) {
    out.degenerate = true;
    return out;
  }
  PairingCache cache(pair, DyadicInterval::root(), win);
  const double num = std::abs(cache.hole_pairing(hole, j));
  const double den =
      poisson_hole(pair.sigma(), hole, j) * std::abs(coefficient_x(pair.w(), j)) / j.length();
  if (den == 0.0) {
    out.degenerate = true;
    return out;
  }
  out.ratio = num / den;
  return out;
}

}  // namespace tw

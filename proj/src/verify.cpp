#include "twoweight/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "twoweight/calibration.hpp"
#include "twoweight/corpus.hpp"
#include "twoweight/io.hpp"
#include "twoweight/sizelemma.hpp"
#include "twoweight/summation.hpp"

namespace tw {

namespace {

std::string fmt(double x) { return format_double(x); }

/// One decomposition-corpus instance with everything the structural checks
/// need, built once and shared.
struct DecompInstance {
  std::string label;
  std::unique_ptr<MeasurePair> pair;
  TruncationWindow win;
  std::unique_ptr<PairingCache> cache;
  ConstantsReport constants;
  EnergyStopping energy;
  std::vector<DyadicInterval> shelters;
  std::unique_ptr<PairCollection> q0;
  bool has_l = false;
  LCollection l;
  PartitionClasses classes;
  DecompositionRun run;
};

struct Workspace {
  std::optional<std::vector<DecompInstance>> decomp_;
  std::optional<std::vector<std::pair<std::string, ConstantsReport>>> constants_;

  std::vector<DecompInstance>& decomp() {
    if (!decomp_) {
      decomp_.emplace();
      for (const CorpusEntry& entry : decompose_corpus()) {
        DecompInstance inst;
        inst.label = entry.label;
        inst.pair = std::make_unique<MeasurePair>(entry.make());
        inst.win = inst.pair->default_window();
        inst.cache =
            std::make_unique<PairingCache>(*inst.pair, DyadicInterval::root(), inst.win);
        inst.constants = constants_report(*inst.pair, inst.win);
        inst.energy = energy_stopping(*inst.pair, DyadicInterval::root(),
                                      calibration::kDefaultC0, inst.constants.h_const);
        inst.shelters = inst.energy.family;
        inst.q0 = std::make_unique<PairCollection>(
            make_q0(*inst.pair, DyadicInterval::root(), inst.shelters, inst.energy.family));
        const double tau = collection_size(*inst.q0, *inst.cache).value;
        if (!inst.q0->empty() && tau > 0.0) {
          inst.has_l = true;
          inst.l = build_l(*inst.q0, *inst.cache);
          inst.classes = partition(*inst.q0, inst.l);
        }
        inst.run = decompose_until(*inst.q0, *inst.cache, 1e-6 * std::max(tau, 1e-30));
        decomp_->push_back(std::move(inst));
      }
    }
    return *decomp_;
  }

  std::vector<std::pair<std::string, ConstantsReport>>& constants() {
    if (!constants_) {
      constants_.emplace();
      for (const CorpusEntry& entry : constants_corpus()) {
        const MeasurePair pair = entry.make();
        constants_->emplace_back(entry.label, constants_report(pair));
      }
    }
    return *constants_;
  }
};

using CheckFn = std::function<CheckResult(Workspace&)>;

CheckResult make_result(const std::string& id, bool pass, double measured, double cap,
                        const std::string& detail) {
  return CheckResult{id, pass, measured, cap, detail};
}

// ---------------------------------------------------------------- grid

CheckResult check_grid_partition(Workspace&) {
  GridConfig cfg;
  cfg.max_depth = 8;
  bool ok = true;
  for (const DyadicInterval& interval : all_intervals(cfg)) {
    if (interval.level() >= cfg.max_depth) continue;
    const auto [left, right] = children(interval, cfg);
    ok = ok && left.left() == interval.left() && left.right() == right.left() &&
         right.right() == interval.right() && !left.contains(right) && !right.contains(left);
  }
  return make_result("grid.partition", ok, 0, 0, "children split every interval exactly");
}

CheckResult check_grid_goodness_monotone(Workspace&) {
  // The separation threshold |J|^eps |A|^(1-eps) shrinks as eps grows, so
  // goodness at eps implies goodness at any larger eps.
  GridConfig cfg;
  cfg.max_depth = 10;
  const double eps_values[] = {0.10, 0.20, 0.30, 0.45};
  bool ok = true;
  for (const DyadicInterval& interval : all_intervals(cfg)) {
    bool prev_good = false;
    for (double e : eps_values) {
      GridConfig c = cfg;
      c.goodness_eps = e;
      const bool good = is_good(interval, c);
      if (prev_good && !good) ok = false;
      prev_good = good;
    }
  }
  return make_result("grid.goodness_monotone_eps", ok, 0, 0,
                     "good at eps implies good at larger eps");
}

CheckResult check_grid_deep_implies_child(Workspace&) {
  GridConfig cfg;
  cfg.max_depth = 7;
  bool ok = true;
  const auto intervals = all_intervals(cfg);
  for (const DyadicInterval& outer : intervals)
    for (const DyadicInterval& inner : intervals) {
      if (!deeply_contained(inner, outer, cfg)) continue;
      ok = ok && outer.strictly_contains(inner) && is_good(inner, cfg);
      const DyadicInterval child = child_containing(outer, inner);
      ok = ok && outer.strictly_contains(child) && child.contains(inner);
    }
  return make_result("grid.deep_implies_child", ok, 0, 0,
                     "deep containment implies strict containment with a well-defined child");
}

CheckResult check_grid_good_separation(Workspace&) {
  // Exact integer oracle at eps = 1/4: dist_units >= 2^((n-m) 3/4) iff
  // dist_units^4 >= 2^(3(n-m)).
  GridConfig cfg;
  cfg.max_depth = 10;
  cfg.goodness_eps = 0.25;
  bool ok = true;
  for (const DyadicInterval& interval : all_intervals(cfg)) {
    const int n = interval.level();
    bool oracle = true;
    for (int m = 0; m <= std::min(n - 1, n - cfg.separation + 1); ++m) {
      const DyadicInterval anc = interval.ancestor(m);
      const std::uint64_t span = std::uint64_t{1} << (n - m);
      const std::uint64_t off = interval.index() - (anc.index() << (n - m));
      const unsigned __int128 d = std::min<std::uint64_t>(off, span - 1 - off);
      const unsigned __int128 lhs = d * d * d * d;
      const unsigned __int128 rhs = static_cast<unsigned __int128>(1) << (3 * (n - m));
      if (lhs < rhs) oracle = false;
    }
    if (oracle != is_good(interval, cfg)) ok = false;
  }
  return make_result("grid.good_separation", ok, 0, 0,
                     "floating goodness test agrees with the exact integer oracle");
}

// ---------------------------------------------------------------- measure

CheckResult check_poisson_comparability(Workspace&) {
  double worst_hi = 0.0, worst_lo = 0.0;
  bool ok = true;
  long checked = 0;
  for (const std::uint64_t seed : {31ULL, 32ULL}) {
    GridConfig cfg;
    cfg.max_depth = 6;
    const MeasurePair pair = gen_uniform_random(seed, 10, 10, 6, cfg);
    const PoissonRatioBounds bounds = poisson_ratio_bounds(cfg);
    const auto intervals = all_intervals(cfg);
    for (const DyadicInterval& hole : intervals) {
      if (hole.is_root()) continue;
      for (const DyadicInterval& mid : intervals) {
        if (!scale_contained(mid, hole, cfg.separation)) continue;
        const bool mid_ok =
            is_good(mid, cfg) || (mid.level() > 0 && is_good(mid.parent(), cfg));
        if (!mid_ok) continue;
        const double p_mid = poisson_hole(pair.sigma(), hole, mid);
        if (!(p_mid > 0.0)) continue;
        const double mid_density = p_mid / mid.length();
        for (const DyadicInterval& inner : intervals) {
          if (!mid.contains(inner)) continue;
          const double p_inner = poisson_hole(pair.sigma(), hole, inner);
          const double ratio = (p_inner / inner.length()) / mid_density;
          worst_hi = std::max(worst_hi, ratio / bounds.hi);
          worst_lo = std::max(worst_lo, bounds.lo / ratio);
          if (ratio > bounds.hi * (1 + 1e-12) || ratio < bounds.lo * (1 - 1e-12)) ok = false;
          ++checked;
        }
      }
    }
  }
  return make_result("measure.poisson_comparability", ok, std::max(worst_hi, worst_lo), 1.0,
                     "kernel-density ratios within the derived bounds over " +
                         std::to_string(checked) + " triples");
}

CheckResult check_truncation_default(Workspace&) {
  const MeasurePair pair = gen_uniform_random(41, 24, 24, 10);
  const TruncationWindow win = pair.default_window();
  std::vector<double> f(pair.sigma().size(), 1.0);
  const auto field = hilbert_field(f, pair, DyadicInterval::root(), win);
  bool ok = true;
  for (std::size_t i = 0; i < pair.w().size(); ++i) {
    CompensatedSum s;
    const double x = pair.w().position(i);
    for (std::size_t j = 0; j < pair.sigma().size(); ++j)
      s.add(pair.sigma().mass_at(j) / (pair.sigma().position(j) - x));
    if (field[i] != s.value()) ok = false;
  }
  return make_result("measure.truncation_default_full", ok, 0, 0,
                     "default window reproduces the untruncated sums exactly");
}

CheckResult check_measure_additivity(Workspace&) {
  double worst = 0.0;
  Rng rng(55);
  for (int round = 0; round < 20; ++round) {
    const AtomicMeasure a = gen_measure(600 + round, 12, 9);
    AtomicMeasure b = gen_measure(700 + round, 12, 9);
    std::vector<Atom> merged;
    for (const Atom& atom : a.atoms()) merged.push_back(atom);
    for (const Atom& atom : b.atoms())
      if (!a.contains_cell(atom.cell)) merged.push_back(atom);
    std::sort(merged.begin(), merged.end(),
              [](const Atom& x, const Atom& y) { return x.cell < y.cell; });
    AtomicMeasure both(9, merged);
    // b minus shared cells, so additivity must compare against that version.
    std::vector<Atom> b_only;
    for (const Atom& atom : b.atoms())
      if (!a.contains_cell(atom.cell)) b_only.push_back(atom);
    AtomicMeasure b2(9, b_only);
    for (int k = 0; k < 10; ++k) {
      const int level = 1 + static_cast<int>(rng.below(8));
      const DyadicInterval interval(level, rng.below(std::int64_t{1} << level));
      const double m = std::abs(both.mass(interval) - a.mass(interval) - b2.mass(interval));
      const double p = std::abs(poisson(both, interval) - poisson(a, interval) - poisson(b2, interval));
      const double scale = std::max(1e-30, std::abs(poisson(both, interval)));
      worst = std::max({worst, m, p / scale});
    }
  }
  return make_result("measure.additivity", worst <= 1e-12, worst, 1e-12,
                     "mass and Poisson integrals additive under merging");
}

// ---------------------------------------------------------------- haar

CheckResult check_haar_orthonormality(Workspace&) {
  double worst = 0.0;
  for (const std::uint64_t seed : {71ULL, 72ULL, 73ULL}) {
    const AtomicMeasure nu = gen_measure(seed, 16, 6);
    const auto intervals = active_intervals(nu, 2);
    std::vector<DyadicInterval> split;
    for (const DyadicInterval& interval : intervals)
      if (is_splittable(nu, interval)) split.push_back(interval);
    for (std::size_t i = 0; i < split.size(); ++i) {
      const auto hi = haar_function(nu, split[i]);
      for (std::size_t j = i; j < split.size(); ++j) {
        const auto hj = haar_function(nu, split[j]);
        const double ip = inner_product(hi, hj, nu);
        worst = std::max(worst, std::abs(ip - (i == j ? 1.0 : 0.0)));
      }
      worst = std::max(worst, std::abs(inner_product(hi, std::vector<double>(nu.size(), 1.0), nu)));
    }
  }
  return make_result("haar.orthonormality", worst <= 1e-10, worst, 1e-10,
                     "Haar system orthonormal and mean-free");
}

CheckResult check_haar_parseval(Workspace&) {
  double worst = 0.0;
  for (const std::uint64_t seed : haar_corpus_seeds()) {
    Rng rng(seed);
    const int atoms = 8 + static_cast<int>(rng.below(57));
    const AtomicMeasure nu = gen_measure(seed * 13 + 1, atoms, 12);
    std::vector<double> f(nu.size());
    for (double& v : f) v = rng.symmetric();
    const HaarCoefficients coeffs = expand(f, nu);
    const double direct = norm_sq(f, nu);
    const double viaHaar = coeffs.norm_sq(nu);
    worst = std::max(worst, std::abs(direct - viaHaar) / std::max(direct, 1e-30));
    const auto back = reconstruct(coeffs, nu);
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      err = std::max(err, std::abs(back[i] - f[i]));
      scale = std::max(scale, std::abs(f[i]));
    }
    worst = std::max(worst, err / std::max(scale, 1e-30));
  }
  return make_result("haar.parseval_roundtrip", worst <= 1e-10, worst, 1e-10,
                     "Parseval identity and expansion round-trip on 50 seeded measures");
}

CheckResult check_haar_energy(Workspace&) {
  double worst = 0.0;
  for (const std::uint64_t seed : haar_corpus_seeds()) {
    const AtomicMeasure nu = gen_measure(seed * 7 + 3, 24, 12);
    Rng rng(seed);
    for (int k = 0; k < 6; ++k) {
      const int level = static_cast<int>(rng.below(5));
      const DyadicInterval interval(level, rng.below(std::int64_t{1} << level));
      const double e = energy(nu, interval);
      const double lhs = e * e * nu.mass(interval) * interval.length() * interval.length();
      CompensatedSum rhs;
      for (const DyadicInterval& j : active_intervals(nu, 2)) {
        if (!interval.contains(j)) continue;
        const double c = coefficient_x(nu, j);
        rhs.add(c * c);
      }
      worst = std::max(worst, std::abs(lhs - rhs.value()) / std::max(std::abs(lhs), 1e-30));
    }
  }
  return make_result("haar.energy_two_formula", worst <= 1e-10, worst, 1e-10,
                     "variance and Haar-sum energy formulas agree");
}

CheckResult check_two_overlap(Workspace&) {
  double worst = 0.0;
  for (const std::uint64_t seed : haar_corpus_seeds()) {
    Rng rng(seed + 4000);
    const AtomicMeasure nu = gen_measure(seed * 3 + 11, 32, 12);
    std::vector<double> f(nu.size());
    for (double& v : f) v = rng.symmetric();
    const HaarCoefficients coeffs = expand(f, nu);
    // Assign every splittable interval to at most two of four projection sets.
    std::vector<std::set<DyadicInterval>> sets(4);
    for (const DyadicInterval& interval : active_intervals(nu, 2)) {
      if (!is_splittable(nu, interval)) continue;
      const int a = static_cast<int>(rng.below(4));
      sets[a].insert(interval);
      if (rng.uniform() < 0.5) sets[(a + 1 + rng.below(3)) % 4].insert(interval);
    }
    CompensatedSum total;
    for (const auto& s : sets) total.add(project(coeffs, s).norm_sq(nu));
    const double bound = 2.0 * norm_sq(f, nu);
    worst = std::max(worst, total.value() / std::max(bound, 1e-30));
  }
  return make_result("haar.two_overlap_projection", worst <= 1.0 + 1e-12, worst, 1.0,
                     "projection mass at most twice the squared norm");
}

// ---------------------------------------------------------------- constants

CheckResult check_necessity(Workspace& ws) {
  double worst = 0.0;
  for (const auto& [label, report] : ws.constants()) {
    const double n = std::max(report.norm, 1e-300);
    worst = std::max({worst, report.testing_sw / n, report.testing_ws / n});
  }
  return make_result("constants.necessity", worst <= 1.0 + 1e-9, worst, 1.0 + 1e-9,
                     "testing constants below the norm on every corpus instance");
}

CheckResult check_power_vs_svd(Workspace& ws) {
  double worst = 0.0;
  for (const auto& [label, report] : ws.constants()) {
    if (report.norm <= 0.0) continue;
    worst = std::max(worst, std::abs(report.norm - report.norm_detail.power_value) / report.norm);
  }
  {
    const MeasurePair big = gen_uniform_random(777, 400, 400, 12);
    const NormEstimate estimate = norm_estimate(big, big.default_window());
    worst = std::max(worst, std::abs(estimate.value - estimate.power_value) /
                                std::max(estimate.value, 1e-300));
  }
  return make_result("constants.power_vs_svd", worst <= 1e-6, worst, 1e-6,
                     "power iteration matches the full decomposition up to 400x400");
}

CheckResult check_ratio_range(Workspace& ws) {
  double max_ratio = 0.0, min_ratio = 1e300;
  for (const auto& [label, report] : ws.constants()) {
    const double ratio = theorem_ratio(report);
    max_ratio = std::max(max_ratio, ratio);
    min_ratio = std::min(min_ratio, ratio);
  }
  const bool ok = max_ratio <= calibration::kRatioCap && min_ratio > 0.0;
  return make_result("constants.ratio_range", ok, max_ratio, calibration::kRatioCap,
                     "norm-to-h ratios in (0, cap]; min " + fmt(min_ratio));
}

// ---------------------------------------------------------------- forms

CheckResult check_matrix_faithful(Workspace& ws) {
  double worst = 0.0;
  int done = 0;
  for (DecompInstance& inst : ws.decomp()) {
    if (inst.q0->empty()) continue;
    const FormMatrix matrix = form_matrix(*inst.q0, *inst.cache);
    Rng rng(900 + done);
    for (int k = 0; k < (done < 4 ? 25 : 5); ++k) {
      HaarCoefficients f, g;
      for (const DyadicInterval& row : matrix.rows) f.set_coefficient(row, rng.symmetric());
      for (const DyadicInterval& col : matrix.cols) g.set_coefficient(col, rng.symmetric());
      const double via_matrix = matrix.apply(f, g);
      const double direct = b_form(*inst.q0, f, g, *inst.cache);
      const double scale = std::max({std::abs(direct), std::abs(via_matrix), 1e-12});
      worst = std::max(worst, std::abs(via_matrix - direct) / scale);
    }
    ++done;
  }
  return make_result("forms.matrix_faithful", worst <= 1e-10, worst, 1e-10,
                     "matrix representation reproduces the bilinear form");
}

CheckResult check_identity_above_stop(Workspace& ws) {
  double worst = 0.0;
  int rounds = 0;
  for (DecompInstance& inst : ws.decomp()) {
    for (int k = 0; k < 4 && rounds < 50; ++k, ++rounds) {
      Rng rng(1300 + rounds);
      const HaarCoefficients f = uniform_f(rng, *inst.pair, inst.shelters);
      const HaarCoefficients g = adapted_g(rng, inst.pair->w(), inst.shelters, inst.pair->cfg());
      const double above = b_above(f, g, *inst.cache);
      const double part = i0_part(f, g, *inst.cache);
      const double stop = b_stop(f, g, *inst.cache);
      const double scale = std::max({std::abs(above), std::abs(part) + std::abs(stop), 1e-9});
      worst = std::max(worst, std::abs(above - (part - stop)) / scale);
    }
  }
  return make_result("forms.identity_above_stop", worst <= 1e-9, worst, 1e-9,
                     "the above form splits exactly into root part minus stopping form");
}

CheckResult check_epsilon_bound(Workspace& ws) {
  double worst = 0.0;
  int rounds = 0;
  for (DecompInstance& inst : ws.decomp()) {
    for (int k = 0; k < 3; ++k, ++rounds) {
      Rng rng(1700 + rounds);
      const HaarCoefficients f = uniform_f(rng, *inst.pair, inst.shelters);
      const HaarCoefficients g = adapted_g(rng, inst.pair->w(), inst.shelters, inst.pair->cfg());
      for (const auto& [j, c] : g.coefficients()) {
        if (!deeply_contained(j, DyadicInterval::root(), inst.pair->cfg())) continue;
        worst = std::max(worst,
                         std::abs(epsilon_j(f, inst.pair->sigma(), j, DyadicInterval::root(),
                                            inst.pair->cfg())));
      }
    }
  }
  return make_result("forms.epsilonJ_bound", worst <= 1.0 + 1e-12, worst, 1.0,
                     "telescoped averages of uniform functions stay within 1");
}

namespace holes_support {

bool holes_hypothesis_ok(const PairCollection& cls, const std::vector<DyadicInterval>& shelters) {
  const std::set<DyadicInterval> shelter_set(shelters.begin(), shelters.end());
  for (const IntervalPair& p : cls.pairs()) {
    bool found = false;
    for (int level = p.q2.level(); level >= 0 && !found; --level) {
      const DyadicInterval anc = p.q2.ancestor(level);
      if (shelter_set.count(anc) && deeply_contained(p.q2, anc, cls.cfg()) &&
          p.tilde.contains(anc))
        found = true;
    }
    if (!found) return false;
  }
  return true;
}

struct LemmaSample {
  PairCollection cls;
  std::vector<DyadicInterval> shelters;
};

/// Classes of the root partition that satisfy the disjoint-holes hypothesis,
/// with their shelters.
std::vector<LemmaSample> holes_samples(DecompInstance& inst) {
  std::vector<LemmaSample> out;
  if (!inst.has_l) return out;
  for (const auto& [lk, v] : inst.classes.large1) {
    PairCollection cls = inst.q0->subset(v);
    if (!cls.empty() && holes_hypothesis_ok(cls, {lk})) out.push_back({std::move(cls), {lk}});
  }
  for (const auto& [key, slot] : inst.classes.large2) {
    if (slot.sub1.empty()) continue;
    PairCollection cls = inst.q0->subset(slot.sub1);
    auto kids = inst.l.kids.find(key.first);
    if (kids == inst.l.kids.end()) continue;
    if (holes_hypothesis_ok(cls, kids->second)) out.push_back({std::move(cls), kids->second});
  }
  if (!inst.classes.large3.empty()) {
    PairCollection cls = inst.q0->subset(inst.classes.large3);
    if (holes_hypothesis_ok(cls, inst.l.maximal)) out.push_back({std::move(cls), inst.l.maximal});
  }
  return out;
}

std::vector<LemmaSample> holes_enclosing_samples(DecompInstance& inst) {
  std::vector<LemmaSample> out;
  if (!inst.has_l) return out;
  for (const auto& [key, slot] : inst.classes.large2) {
    if (slot.sub2.empty()) continue;
    auto kids = inst.l.kids.find(key.first);
    if (kids == inst.l.kids.end()) continue;
    out.push_back({inst.q0->subset(slot.sub2), kids->second});
  }
  if (!inst.classes.large4.empty())
    out.push_back({inst.q0->subset(inst.classes.large4), inst.l.maximal});
  return out;
}

}  // namespace holes_support

CheckResult check_holes_bound(Workspace& ws) {
  double worst = 0.0;
  int samples = 0;
  for (DecompInstance& inst : ws.decomp()) {
    for (auto& sample : holes_support::holes_samples(inst)) {
      const double eta = eta_holes(sample.cls, sample.shelters, *inst.cache);
      const double norm = form_matrix(sample.cls, *inst.cache).norm();
      if (eta > 0.0)
        worst = std::max(worst, norm / eta);
      else if (norm > 1e-12)
        worst = std::max(worst, 1e300);
      ++samples;
    }
  }
  return make_result("forms.holes_bound", worst <= calibration::kCapHoles, worst,
                     calibration::kCapHoles,
                     "disjoint-holes estimate over " + std::to_string(samples) + " classes");
}

CheckResult check_holes_enclosing_bound(Workspace& ws) {
  double worst = 0.0;
  int samples = 0;
  for (DecompInstance& inst : ws.decomp()) {
    for (auto& sample : holes_support::holes_enclosing_samples(inst)) {
      const double eta = eta_Holes(sample.cls, sample.shelters, *inst.cache);
      const double norm = form_matrix(sample.cls, *inst.cache).norm();
      if (eta > 0.0)
        worst = std::max(worst, norm / eta);
      else if (norm > 1e-12)
        worst = std::max(worst, 1e300);
      ++samples;
    }
  }
  return make_result("forms.Holes_bound", worst <= calibration::kCapHolesEnclosing, worst,
                     calibration::kCapHolesEnclosing,
                     "enclosing-holes estimate over " + std::to_string(samples) + " classes");
}

CheckResult check_equal_bound(Workspace& ws) {
  double worst = 0.0;
  bool unique_ok = true;
  int samples = 0;
  for (DecompInstance& inst : ws.decomp()) {
    if (inst.q0->empty()) continue;
    std::map<int, std::vector<IntervalPair>> by_gap;
    for (const IntervalPair& p : inst.q0->pairs())
      by_gap[p.q2.level() - p.q1.level()].push_back(p);
    for (const auto& [gap, v] : by_gap) {
      const PairCollection cls = inst.q0->subset(v);
      std::set<DyadicInterval> seen;
      for (const IntervalPair& p : cls.pairs())
        if (!seen.insert(p.q2).second) unique_ok = false;
      const double size = collection_size(cls, *inst.cache).value;
      const double norm = form_matrix(cls, *inst.cache).norm();
      if (size > 0.0)
        worst = std::max(worst, norm / size);
      else if (norm > 1e-12)
        worst = std::max(worst, 1e300);
      ++samples;
    }
  }
  return make_result("forms.equal_bound", worst <= calibration::kCapEqual && unique_ok, worst,
                     calibration::kCapEqual,
                     "fixed-ratio estimate with unique q1 per q2 over " +
                         std::to_string(samples) + " slices");
}

CheckResult check_eta_le_size(Workspace& ws) {
  double worst_ratio = 0.0;
  double worst_regroup = 0.0;
  for (DecompInstance& inst : ws.decomp()) {
    for (auto& sample : holes_support::holes_samples(inst)) {
      const double eta = eta_holes(sample.cls, sample.shelters, *inst.cache);
      const double size = collection_size(sample.cls, *inst.cache).value;
      if (size > 0.0) worst_ratio = std::max(worst_ratio, eta / size);
      // Regrouped evaluation through the maximal deep members of each shelter.
      const GridConfig& cfg = sample.cls.cfg();
      for (const DyadicInterval& s : sample.shelters) {
        const double mass = inst.pair->sigma().mass(s);
        if (!(mass > 0.0)) continue;
        std::vector<DyadicInterval> inside;
        for (const DyadicInterval& j : sample.cls.q2_set())
          if (deeply_contained(j, s, cfg)) inside.push_back(j);
        CompensatedSum flat;
        for (const DyadicInterval& j : inside) {
          const double term =
              inst.cache->poisson_outside(s, j) * inst.cache->coeff_x(j) / j.length();
          flat.add(term * term);
        }
        // Group by maximal elements.
        std::set<DyadicInterval> inside_set(inside.begin(), inside.end());
        CompensatedSum grouped;
        for (const DyadicInterval& top : inside) {
          bool maximal = true;
          for (int level = top.level() - 1; level >= 0 && maximal; --level)
            if (inside_set.count(top.ancestor(level))) maximal = false;
          if (!maximal) continue;
          CompensatedSum sub;
          for (const DyadicInterval& j : inside) {
            if (!top.contains(j)) continue;
            const double term =
                inst.cache->poisson_outside(s, j) * inst.cache->coeff_x(j) / j.length();
            sub.add(term * term);
          }
          grouped.add(sub.value());
        }
        const double scale = std::max(flat.value(), 1e-30);
        worst_regroup = std::max(worst_regroup, std::abs(flat.value() - grouped.value()) / scale);
      }
    }
  }
  const bool ok = worst_ratio <= calibration::kCapEtaVsSize && worst_regroup <= 1e-12;
  return make_result("forms.eta_le_size", ok, worst_ratio, calibration::kCapEtaVsSize,
                     "eta controlled by size; regrouped sums agree to " + fmt(worst_regroup));
}

CheckResult check_quasi_orthogonality(Workspace&) {
  double worst = 0.0;
  bool growth_ok = true;
  for (int round = 0; round < 50; ++round) {
    Rng rng(2200 + round);
    const AtomicMeasure sigma = gen_measure(2600 + round, 16 + round % 48, 12);
    std::vector<double> f(sigma.size());
    for (double& v : f) v = rng.symmetric() * (rng.uniform() < 0.2 ? 40.0 : 1.0);
    const StoppingData data = stopping_data(f, sigma, DyadicInterval::root());
    for (const DyadicInterval& member : data.tree) {
      for (int level = member.level() - 1; level >= 0; --level) {
        const DyadicInterval anc = member.ancestor(level);
        if (std::count(data.tree.begin(), data.tree.end(), anc)) {
          if (!(data.alpha.at(member) > 4.0 * data.alpha.at(anc))) growth_ok = false;
          break;
        }
      }
    }
    const double bound = norm_sq(f, sigma);
    if (bound > 0.0) worst = std::max(worst, data.carleson_sum(sigma) / bound);
  }
  return make_result("forms.quasi_orthogonality", worst <= calibration::kCapQuasi && growth_ok,
                     worst, calibration::kCapQuasi,
                     "Carleson sums of stopping data within the cap, alpha growing by >4");
}

CheckResult check_monotonicity(Workspace&) {
  double worst = 0.0;
  long checked = 0;
  for (const std::uint64_t seed : {91ULL, 92ULL}) {
    GridConfig cfg;
    cfg.max_depth = 7;
    const MeasurePair pair = gen_uniform_random(seed, 14, 14, 7, cfg);
    const TruncationWindow win = pair.default_window();
    for (const DyadicInterval& hole : all_intervals(cfg)) {
      if (hole.is_root()) continue;
      for (const DyadicInterval& j : all_intervals(cfg)) {
        if (!deeply_contained(j, hole, cfg)) continue;
        const MonotonicityResult res = monotonicity_check(pair, hole, j, win);
        if (res.degenerate) continue;
        worst = std::max(worst, res.ratio);
        ++checked;
      }
    }
  }
  return make_result("forms.monotonicity_principle", worst <= calibration::kCapMono, worst,
                     calibration::kCapMono,
                     "pairing against the Poisson-energy product over " +
                         std::to_string(checked) + " hole/interval pairs");
}

CheckResult check_phi_bound(Workspace& ws) {
  double worst = 0.0;
  bool vanish_ok = true;
  for (DecompInstance& inst : ws.decomp()) {
    if (inst.q0->empty()) continue;
    Rng rng(3100);
    const HaarCoefficients f = uniform_f(rng, *inst.pair, inst.shelters);
    const std::vector<double> values = reconstruct(f, inst.pair->sigma());
    if (!(inst.pair->sigma().mass(DyadicInterval::root()) > 0.0)) continue;
    const StoppingData data = stopping_data(values, inst.pair->sigma(), DyadicInterval::root());
    int taken = 0;
    for (const DyadicInterval& j : inst.q0->q2_set()) {
      if (taken++ > 40) break;
      const auto phi = phi_j(*inst.q0, f, j, *inst.pair);
      const auto parent = data.parent_of(j);
      const double alpha = parent ? data.alpha.at(*parent) : data.alpha.at(DyadicInterval::root());
      std::optional<DyadicInterval> shelter;
      for (const DyadicInterval& s : inst.shelters)
        if (s.contains(j)) shelter = s;
      for (std::size_t i = 0; i < phi.size(); ++i) {
        if (shelter && shelter->contains_point(inst.pair->sigma().position(i))) {
          if (phi[i] != 0.0) vanish_ok = false;
          continue;
        }
        if (alpha > 0.0) worst = std::max(worst, std::abs(phi[i]) / alpha);
      }
    }
  }
  return make_result("forms.phi_bound", worst <= calibration::kCapPhi && vanish_ok, worst,
                     calibration::kCapPhi,
                     "step functions bounded by stopping values and vanishing on shelters");
}

// ---------------------------------------------------------------- sizelemma

CheckResult check_q0_b_stop(Workspace& ws) {
  double worst = 0.0;
  int rounds = 0;
  for (DecompInstance& inst : ws.decomp()) {
    for (int k = 0; k < 3; ++k, ++rounds) {
      Rng rng(3500 + rounds);
      const HaarCoefficients f = uniform_f(rng, *inst.pair, inst.shelters);
      const HaarCoefficients g = adapted_g(rng, inst.pair->w(), inst.shelters, inst.pair->cfg());
      const double via_q0 = b_form(*inst.q0, f, g, *inst.cache);
      const double stop = b_stop(f, g, *inst.cache);
      const double scale = std::max({std::abs(stop), std::abs(via_q0), 1e-9});
      worst = std::max(worst, std::abs(via_q0 - stop) / scale);
    }
  }
  return make_result("sizelemma.q0_b_stop_identity", worst <= 1e-9, worst, 1e-9,
                     "the stopping form coincides with the form over Q0");
}

namespace tree_support {

void visit(const DecompositionNode& node, const std::function<void(const DecompositionNode&)>& fn) {
  fn(node);
  for (const DecompositionNode& child : node.children) visit(child, fn);
}

}  // namespace tree_support

CheckResult check_partition(Workspace& ws) {
  bool ok = true;
  std::size_t nodes = 0;
  for (DecompInstance& inst : ws.decomp())
    tree_support::visit(inst.run.root, [&](const DecompositionNode& node) {
      ++nodes;
      if (node.report) ok = ok && node.report->partition_exact && node.report->trange_ok;
    });
  return make_result("sizelemma.partition", ok, static_cast<double>(nodes), 0,
                     "exact admissible partitions with the t-range facts at every node");
}

CheckResult check_small_sizes(Workspace& ws) {
  double worst = 0.0;
  for (DecompInstance& inst : ws.decomp())
    tree_support::visit(inst.run.root, [&](const DecompositionNode& node) {
      if (node.report && node.tau > 0.0)
        worst = std::max(worst, node.report->small_size_max / (node.tau / 4.0));
    });
  return make_result("sizelemma.small_sizes", worst <= 1.0 + 1e-12, worst, 1.0,
                     "small classes at a quarter of the size");
}

CheckResult check_ddecay_all(Workspace& ws) {
  double worst = 0.0;
  for (DecompInstance& inst : ws.decomp())
    tree_support::visit(inst.run.root, [&](const DecompositionNode& node) {
      if (node.report) worst = std::max(worst, node.report->ddecay_max);
    });
  return make_result("sizelemma.ddecay", worst <= 1.0 + 1e-12, worst, 1.0,
                     "geometric tent decay across generations");
}

CheckResult check_l_termination(Workspace& ws) {
  double worst = 0.0;
  bool ok = true;
  for (DecompInstance& inst : ws.decomp())
    tree_support::visit(inst.run.root, [&](const DecompositionNode& node) {
      if (!node.report) return;
      if (node.report->l_member_bound > 0)
        worst = std::max(worst, static_cast<double>(node.report->l_generations) /
                                    static_cast<double>(node.report->l_member_bound));
      if (node.report->l_generations > static_cast<int>(node.report->l_member_bound)) ok = false;
    });
  return make_result("sizelemma.l_termination", ok, worst, 1.0,
                     "selection terminates within the member bound");
}

CheckResult check_energy_mass(Workspace& ws) {
  double worst = 0.0;
  for (DecompInstance& inst : ws.decomp()) {
    const double root_mass = inst.pair->sigma().mass(DyadicInterval::root());
    if (!(root_mass > 0.0)) continue;
    worst = std::max(worst, inst.energy.sigma_union(inst.pair->sigma()) / root_mass);
  }
  return make_result("sizelemma.energy_mass_bound", worst <= 0.1, worst, 0.1,
                     "energy stopping union at a tenth of the mass at the default c0");
}

CheckResult check_energy_monotone(Workspace& ws) {
  bool ok = true;
  for (DecompInstance& inst : ws.decomp()) {
    std::vector<EnergyStopping> families;
    for (double c0 : {calibration::kDefaultC0, 2 * calibration::kDefaultC0,
                      4 * calibration::kDefaultC0})
      families.push_back(
          energy_stopping(*inst.pair, DyadicInterval::root(), c0, inst.constants.h_const));
    for (std::size_t i = 0; i + 1 < families.size(); ++i) {
      // Larger c0: every member must sit inside some member at the smaller c0.
      for (const DyadicInterval& f : families[i + 1].family) {
        bool covered = false;
        for (const DyadicInterval& g : families[i].family)
          if (g.contains(f)) covered = true;
        if (!covered) ok = false;
      }
      if (families[i + 1].sigma_union(inst.pair->sigma()) >
          families[i].sigma_union(inst.pair->sigma()) + 1e-12)
        ok = false;
    }
  }
  return make_result("sizelemma.energy_monotone_c0", ok, 0, 0,
                     "energy families shrink as c0 grows");
}

CheckResult check_orthogonality(Workspace& ws) {
  double worst = -1e300;
  bool structural = true;
  for (DecompInstance& inst : ws.decomp())
    tree_support::visit(inst.run.root, [&](const DecompositionNode& node) {
      if (!node.report) return;
      structural = structural && node.report->orthogonality_structural;
      worst = std::max(worst, node.report->subadd_excess);
    });
  return make_result("sizelemma.orthogonality", structural && worst <= 1e-8, worst, 1e-8,
                     "mutually orthogonal families aggregate within sqrt(2)");
}

CheckResult check_recursion(Workspace& ws) {
  bool ok = true;
  double worst_constant = 0.0;
  for (DecompInstance& inst : ws.decomp()) {
    ok = ok && inst.run.depth_applied <= inst.run.depth_bound && inst.run.zeta_ok;
    worst_constant = std::max(worst_constant, inst.run.max_node_constant);
  }
  ok = ok && worst_constant <= calibration::kCapNodeConstant;
  return make_result("sizelemma.recursion", ok, worst_constant, calibration::kCapNodeConstant,
                     "depth bound, geometric shrinking, and the iterated norm bound");
}

CheckResult check_y_decay(Workspace& ws) {
  double worst = 0.0;
  for (DecompInstance& inst : ws.decomp())
    tree_support::visit(inst.run.root, [&](const DecompositionNode& node) {
      if (node.report) worst = std::max(worst, node.report->y_decay_constant);
    });
  return make_result("sizelemma.y_decay", worst <= calibration::kCapYDecay, worst,
                     calibration::kCapYDecay, "norms of the comparable classes decay in t");
}

// ---------------------------------------------------------------- cli

CheckResult check_determinism(Workspace&) {
  GenParams params;
  params.kind = MeasureKind::UniformRandom;
  params.seed = 4242;
  params.atoms = 24;
  params.depth = 10;
  const MeasurePair a = generate_pair(params);
  const MeasurePair b = generate_pair(params);
  const std::string pair_a = pair_to_json(a).dump();
  const std::string pair_b = pair_to_json(b).dump();
  const std::string rep_a = constants_to_json(constants_report(a)).dump();
  const std::string rep_b = constants_to_json(constants_report(b)).dump();
  const bool ok = pair_a == pair_b && rep_a == rep_b;
  return make_result("cli.determinism", ok, 0, 0, "identical configs give byte-identical reports");
}

const std::vector<std::pair<std::string, CheckFn>>& registry() {
  static const std::vector<std::pair<std::string, CheckFn>> checks = {
      {"grid.partition", check_grid_partition},
      {"grid.goodness_monotone_eps", check_grid_goodness_monotone},
      {"grid.deep_implies_child", check_grid_deep_implies_child},
      {"grid.good_separation", check_grid_good_separation},
      {"measure.poisson_comparability", check_poisson_comparability},
      {"measure.truncation_default_full", check_truncation_default},
      {"measure.additivity", check_measure_additivity},
      {"haar.orthonormality", check_haar_orthonormality},
      {"haar.parseval_roundtrip", check_haar_parseval},
      {"haar.energy_two_formula", check_haar_energy},
      {"haar.two_overlap_projection", check_two_overlap},
      {"constants.necessity", check_necessity},
      {"constants.power_vs_svd", check_power_vs_svd},
      {"constants.ratio_range", check_ratio_range},
      {"forms.matrix_faithful", check_matrix_faithful},
      {"forms.identity_above_stop", check_identity_above_stop},
      {"forms.epsilonJ_bound", check_epsilon_bound},
      {"forms.holes_bound", check_holes_bound},
      {"forms.Holes_bound", check_holes_enclosing_bound},
      {"forms.equal_bound", check_equal_bound},
      {"forms.eta_le_size", check_eta_le_size},
      {"forms.quasi_orthogonality", check_quasi_orthogonality},
      {"forms.monotonicity_principle", check_monotonicity},
      {"forms.phi_bound", check_phi_bound},
      {"sizelemma.q0_b_stop_identity", check_q0_b_stop},
      {"sizelemma.partition", check_partition},
      {"sizelemma.small_sizes", check_small_sizes},
      {"sizelemma.ddecay", check_ddecay_all},
      {"sizelemma.l_termination", check_l_termination},
      {"sizelemma.energy_mass_bound", check_energy_mass},
      {"sizelemma.energy_monotone_c0", check_energy_monotone},
      {"sizelemma.orthogonality", check_orthogonality},
      {"sizelemma.recursion", check_recursion},
      {"sizelemma.y_decay", check_y_decay},
      {"cli.determinism", check_determinism},
  };
  return checks;
}

}  // namespace

std::vector<CheckResult> run_verify() { return run_verify({}); }

VerifyRun run_verify_timed() {
  using Clock = std::chrono::steady_clock;
  VerifyRun run;
  Workspace ws;
  {
    const auto start = Clock::now();
    ws.decomp();
    run.decomp_setup_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  }
  {
    const auto start = Clock::now();
    ws.constants();
    run.constants_setup_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  }
  for (const auto& [id, fn] : registry()) {
    const auto start = Clock::now();
    CheckResult result;
    try {
      result = fn(ws);
    } catch (const std::exception& e) {
      result = make_result(id, false, 0, 0, std::string("exception: ") + e.what());
    }
    result.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    run.results.push_back(std::move(result));
  }
  return run;
}

std::vector<CheckResult> run_verify(const std::vector<std::string>& prefixes) {
  Workspace ws;
  std::vector<CheckResult> out;
  for (const auto& [id, fn] : registry()) {
    if (!prefixes.empty()) {
      bool wanted = false;
      for (const std::string& prefix : prefixes)
        if (id.rfind(prefix, 0) == 0) wanted = true;
      if (!wanted) continue;
    }
    try {
      out.push_back(fn(ws));
    } catch (const std::exception& e) {
      out.push_back(make_result(id, false, 0, 0, std::string("exception: ") + e.what()));
    }
  }
  return out;
}

}  // namespace tw

#include "twoweight/sizelemma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "twoweight/summation.hpp"

namespace tw {

double EnergyStopping::sigma_union(const AtomicMeasure& sigma) const {
  CompensatedSum s;
  for (const DyadicInterval& f : family) s.add(sigma.mass(f));
  return s.value();
}

namespace {

double poisson_restricted(const AtomicMeasure& nu, const DyadicInterval& window,
                          const DyadicInterval& target) {
  auto [first, last] = nu.atom_range(window);
  const double len = target.length();
  const double len2 = len * len;
  CompensatedSum s;
  for (std::size_t i = first; i < last; ++i) {
    const double d = target.distance_to(nu.position(i));
    s.add(nu.mass_at(i) * len / (len2 + d * d));
  }
  return s.value();
}

void energy_scan(const MeasurePair& pair, const DyadicInterval& root, double threshold_base,
                 const DyadicInterval& interval, EnergyStopping& out) {
  auto [wfirst, wlast] = pair.w().atom_range(interval);
  if (wlast - wfirst < 2) return;  // E(w, .) vanishes below, nothing can violate
  const double e = energy(pair.w(), interval);
  const double p = poisson_restricted(pair.sigma(), root, interval);
  const double lhs = p * p * e * e * pair.w().mass(interval);
  if (lhs > threshold_base * pair.sigma().mass(interval)) {
    EnergyStopping::MemberInfo info;
    info.interval = interval;
    info.lhs = lhs;
    const double p_alt = poisson_hole(pair.sigma(), interval, interval);
    info.lhs_alt = p_alt * p_alt * e * e * pair.w().mass(interval);
    info.sigma_mass = pair.sigma().mass(interval);
    info.w_mass = pair.w().mass(interval);
    out.family.push_back(interval);
    out.info.push_back(info);
    return;  // maximal violator: do not descend
  }
  if (interval.level() >= pair.cfg().max_depth) return;
  energy_scan(pair, root, threshold_base, interval.left_child(), out);
  energy_scan(pair, root, threshold_base, interval.right_child(), out);
}

}  // namespace

EnergyStopping energy_stopping(const MeasurePair& pair, const DyadicInterval& root, double c0,
                               double h_const) {
  if (!(c0 > 0.0)) throw std::invalid_argument("energy_stopping: c0 must be positive");
  EnergyStopping out;
  out.root = root;
  out.c0 = c0;
  out.h_const = h_const;
  const double threshold_base = 10.0 * c0 * h_const * h_const;
  if (root.level() < pair.cfg().max_depth) {
    energy_scan(pair, root, threshold_base, root.left_child(), out);
    energy_scan(pair, root, threshold_base, root.right_child(), out);
  }
  return out;
}

std::optional<DyadicInterval> LCollection::min_ancestor(const DyadicInterval& interval,
                                                        int root_level) const {
  for (int level = interval.level(); level >= root_level; --level) {
    const DyadicInterval anc = interval.ancestor(level);
    if (member_set.count(anc)) return anc;
  }
  return std::nullopt;
}

std::optional<DyadicInterval> LCollection::strict_parent(const DyadicInterval& member) const {
  auto it = up.find(member);
  if (it == up.end()) return std::nullopt;
  return it->second;
}

namespace {

/// Minimal elements (containing no other marked interval strictly inside) of
/// a set of intervals.
std::vector<DyadicInterval> minimal_elements(const std::set<DyadicInterval>& family) {
  std::set<DyadicInterval> has_strict_descendant;
  for (const DyadicInterval& k : family)
    for (int level = k.level() - 1; level >= 0; --level)
      if (family.count(k.ancestor(level))) has_strict_descendant.insert(k.ancestor(level));
  std::vector<DyadicInterval> out;
  for (const DyadicInterval& k : family)
    if (!has_strict_descendant.count(k)) out.push_back(k);
  return out;
}

}  // namespace

LCollection build_l(const PairCollection& collection, PairingCache& cache) {
  LCollection out;
  out.tents = tent_measure(collection, cache);
  const AtomicMeasure& sigma = cache.pair().sigma();
  const int root_level = collection.root().level();

  // Generation 0: minimal members satisfying the seed inequality
  //   P(sigma outside K, K)^2 / |K|^2 * tent(K) >= tau^2 sigma(K) / 16.
  const double tau = collection_size(collection, cache, out.tents).value;
  const double seed_rhs_factor = tau * tau / 16.0;
  std::set<DyadicInterval> satisfiers;
  for (const DyadicInterval& k : collection.members()) {
    const double p = cache.poisson_outside(k, k);
    const double len = k.length();
    const double lhs = p * p / (len * len) * out.tent(k);
    if (lhs >= seed_rhs_factor * sigma.mass(k)) satisfiers.insert(k);
  }
  for (const DyadicInterval& k : minimal_elements(satisfiers)) {
    out.member_set.insert(k);
    out.generation[k] = 0;
  }

  // Stock: members strictly containing a selected interval. U(S) tracks the
  // tent mass of the maximal selected intervals strictly inside S.
  std::map<DyadicInterval, double> covered;  // U
  auto insert_member = [&](const DyadicInterval& l, int gen) {
    const double delta = out.tent(l) - (covered.count(l) ? covered[l] : 0.0);
    for (int level = l.level() - 1; level >= root_level; --level)
      covered[l.ancestor(level)] += delta;
    out.member_set.insert(l);
    out.generation[l] = gen;
  };
  {
    // Re-run generation-0 insertion through the same bookkeeping.
    std::vector<DyadicInterval> gen0(out.member_set.begin(), out.member_set.end());
    out.member_set.clear();
    for (const DyadicInterval& l : gen0) insert_member(l, 0);
  }

  std::set<DyadicInterval> ancestors_of_members;
  for (const DyadicInterval& l : out.member_set)
    for (int level = l.level() - 1; level >= root_level; --level)
      ancestors_of_members.insert(l.ancestor(level));
  std::set<DyadicInterval> stock;
  for (const DyadicInterval& k : collection.members())
    if (!out.member_set.count(k) && ancestors_of_members.count(k)) stock.insert(k);

  int gen = 0;
  const std::size_t member_bound = collection.members().size();
  while (!stock.empty()) {
    std::set<DyadicInterval> hit;
    for (const DyadicInterval& s : stock)
      if (out.tent(s) >= kRho * covered[s]) hit.insert(s);
    const std::vector<DyadicInterval> selected = minimal_elements(hit);
    if (selected.empty()) break;
    ++gen;
    if (static_cast<std::size_t>(gen) > member_bound)
      throw std::runtime_error("build_l: generation count exceeded the member bound");
    for (const DyadicInterval& l : selected) insert_member(l, gen);
    for (auto it = stock.begin(); it != stock.end();) {
      bool swallowed = false;
      for (int level = it->level(); level >= root_level && !swallowed; --level)
        if (out.member_set.count(it->ancestor(level))) swallowed = true;
      it = swallowed ? stock.erase(it) : ++it;
    }
  }
  out.generations = gen;

  out.members.assign(out.member_set.begin(), out.member_set.end());
  std::sort(out.members.begin(), out.members.end());
  for (const DyadicInterval& l : out.members) {
    std::optional<DyadicInterval> parent;
    for (int level = l.level() - 1; level >= root_level; --level)
      if (out.member_set.count(l.ancestor(level))) {
        parent = l.ancestor(level);
        break;
      }
    if (parent) {
      out.up.emplace(l, *parent);
      out.kids[*parent].push_back(l);
    } else {
      out.maximal.push_back(l);
    }
  }
  return out;
}

double check_ddecay(const LCollection& l) {
  // bucket[t-ancestor][t] accumulates tent sums over t-fold descendants.
  std::map<std::pair<DyadicInterval, int>, double> bucket;
  int max_t = 0;
  for (const DyadicInterval& member : l.members) {
    int t = 0;
    DyadicInterval cur = member;
    while (auto parent = l.strict_parent(cur)) {
      ++t;
      cur = *parent;
      bucket[{cur, t}] += l.tent(member);
      max_t = std::max(max_t, t);
    }
  }
  double worst = 0.0;
  for (const auto& [key, lhs] : bucket) {
    const double rhs = std::pow(kRho, -key.second) * l.tent(key.first);
    if (rhs > 0.0)
      worst = std::max(worst, lhs / rhs);
    else if (lhs > 0.0)
      worst = std::max(worst, std::numeric_limits<double>::infinity());
  }
  return worst;
}

std::vector<IntervalPair> PartitionClasses::LargeT::all() const {
  std::vector<IntervalPair> out = sub1;
  out.insert(out.end(), sub2.begin(), sub2.end());
  out.insert(out.end(), sub3.begin(), sub3.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t PartitionClasses::total() const {
  std::size_t n = small2.size() + large3.size() + large4.size() + large5.size();
  for (const auto& [l, v] : small1) n += v.size();
  for (const auto& [l, v] : large1) n += v.size();
  for (const auto& [key, v] : large2) n += v.sub1.size() + v.sub2.size() + v.sub3.size();
  return n;
}

PartitionClasses partition(const PairCollection& collection, const LCollection& l) {
  PartitionClasses out;
  const GridConfig& cfg = collection.cfg();
  const int root_level = collection.root().level();
  const int r = cfg.separation;

  for (const IntervalPair& p : collection.pairs()) {
    const auto a_q2 = l.min_ancestor(p.q2, root_level);
    if (!a_q2) {
      out.small2.push_back(p);
      continue;
    }
    const auto a_tilde = l.min_ancestor(p.tilde, root_level);
    if (a_tilde) {
      const DyadicInterval target = *a_tilde;
      // Walk q2's chain of family members to find t with pi^t(q2) = target.
      DyadicInterval cur;
      if (l.contains(p.q2)) {
        auto parent = l.strict_parent(p.q2);
        if (!parent) throw std::runtime_error("partition: member q2 without the needed parent");
        cur = *parent;
      } else {
        cur = *a_q2;
      }
      int t = 1;
      DyadicInterval below = p.q2;  // chain element just under cur, for the S_L split
      while (cur != target) {
        auto parent = l.strict_parent(cur);
        if (!parent) throw std::runtime_error("partition: chain ended before the tilde ancestor");
        below = cur;
        cur = *parent;
        ++t;
      }
      if (t == 1) {
        if (p.tilde == target)
          out.large1[target].push_back(p);
        else
          out.small1[target].push_back(p);
      } else {
        auto& slot = out.large2[{target, t}];
        const DyadicInterval pi_s = below;  // the S_L-member over q2
        if (deeply_contained(p.q2, pi_s, cfg))
          slot.sub1.push_back(p);
        else if (scale_contained(pi_s, p.tilde, r))
          slot.sub2.push_back(p);
        else
          slot.sub3.push_back(p);
      }
      continue;
    }
    // q2 has a family ancestor, tilde does not: split through the maximal
    // members.
    DyadicInterval lstar = *a_q2;
    while (auto parent = l.strict_parent(lstar)) lstar = *parent;
    if (deeply_contained(p.q2, lstar, cfg)) {
      out.large3.push_back(p);
    } else if (scale_contained(lstar, p.tilde, r)) {
      out.large4.push_back(p);
    } else {
      out.large5.push_back(p);
      const int gap = p.q2.level() - p.q1.level();
      if (gap < r || gap > 2 * r + 2)
        throw std::runtime_error("partition: large5 scale ratio outside [2^r, 2^(2r+2)]");
    }
  }
  return out;
}

namespace {

struct ClassNorms {
  FormMatrix matrix;
  double norm = 0.0;
};

ClassReport report_class(const std::string& name, std::optional<DyadicInterval> l, int t,
                         const PairCollection& cls, PairingCache& cache) {
  ClassReport rep;
  rep.name = name;
  rep.l = l;
  rep.t = t;
  rep.count = cls.size();
  rep.size = collection_size(cls, cache).value;
  rep.norm = form_matrix(cls, cache).norm();
  return rep;
}

std::string interval_tag(const DyadicInterval& interval) {
  return std::to_string(interval.level()) + ":" + std::to_string(interval.index());
}

}  // namespace

SizeLemmaReport verify_size_lemma(const PairCollection& collection, PairingCache& cache) {
  SizeLemmaReport out;
  out.pair_count = collection.size();
  const TentMap tents = tent_measure(collection, cache);
  out.tau = collection_size(collection, cache, tents).value;
  out.norm = form_matrix(collection, cache).norm();
  out.l_member_bound = collection.members().size();
  if (collection.empty() || !(out.tau > 0.0)) {
    out.partition_exact = true;
    out.orthogonality_structural = true;
    out.trange_ok = true;
    return out;
  }

  const LCollection l = build_l(collection, cache);
  out.l_count = l.members.size();
  out.l_generations = l.generations;
  out.ddecay_max = check_ddecay(l);

  const PartitionClasses classes = partition(collection, l);
  out.partition_exact = classes.total() == collection.size();
  if (!out.partition_exact) throw std::runtime_error("verify_size_lemma: partition not exact");

  const GridConfig& cfg = collection.cfg();
  const int r = cfg.separation;

  // t-range structure: the S_L split degenerates to sub1 once t > r + 1.
  out.trange_ok = true;
  for (const auto& [key, slot] : classes.large2)
    if (key.second > r + 1 && (!slot.sub2.empty() || !slot.sub3.empty())) out.trange_ok = false;
  if (!out.trange_ok) throw std::runtime_error("verify_size_lemma: t-range facts violated");

  // Build validated collections per class; validation failures are hard
  // errors (admissibility must be inherited).
  std::map<DyadicInterval, PairCollection> small1, large1;
  std::map<std::pair<DyadicInterval, int>, PairCollection> large2_all;
  for (const auto& [lk, v] : classes.small1) small1.emplace(lk, collection.subset(v));
  for (const auto& [lk, v] : classes.large1) large1.emplace(lk, collection.subset(v));
  for (const auto& [key, slot] : classes.large2) large2_all.emplace(key, collection.subset(slot.all()));
  PairCollection small2 = collection.subset(classes.small2);
  PairCollection large3 = collection.subset(classes.large3);
  PairCollection large4 = collection.subset(classes.large4);
  PairCollection large5 = collection.subset(classes.large5);

  double small_sup = 0.0;
  for (const auto& [lk, cls] : small1) {
    ClassReport rep = report_class("small1", lk, 1, cls, cache);
    small_sup = std::max(small_sup, rep.norm);
    out.small_size_max = std::max(out.small_size_max, rep.size);
    out.classes.push_back(rep);
    if (!cls.empty())
      out.small_classes.push_back({"small1[" + interval_tag(lk) + "]", cls});
  }
  {
    ClassReport rep = report_class("small2", std::nullopt, 0, small2, cache);
    small_sup = std::max(small_sup, rep.norm);
    out.small_size_max = std::max(out.small_size_max, rep.size);
    out.classes.push_back(rep);
    if (!small2.empty()) out.small_classes.push_back({"small2", small2});
  }
  out.small_sup_norm = small_sup;

  for (const auto& [lk, cls] : large1) out.classes.push_back(report_class("large1", lk, 1, cls, cache));
  for (const auto& [key, cls] : large2_all) {
    ClassReport rep = report_class("large2", key.first, key.second, cls, cache);
    out.classes.push_back(rep);
    const auto& slot = classes.large2.at(key);
    for (const auto* sub : {&slot.sub1, &slot.sub2, &slot.sub3}) {
      static const char* names[] = {"large2.sub1", "large2.sub2", "large2.sub3"};
      const int idx = sub == &slot.sub1 ? 0 : (sub == &slot.sub2 ? 1 : 2);
      if (!sub->empty())
        out.classes.push_back(
            report_class(names[idx], key.first, key.second, collection.subset(*sub), cache));
    }
    // Decay measurement for the Y lemma.
    const double weight = std::pow(kRho, -0.5 * key.second) * out.tau;
    if (weight > 0.0) out.y_decay_constant = std::max(out.y_decay_constant, rep.norm / weight);
  }
  // t = 1 enters the decay measurement through Q_{L,1} = small1 + large1.
  {
    std::map<DyadicInterval, std::vector<IntervalPair>> t1;
    for (const auto& [lk, v] : classes.small1) {
      auto& dst = t1[lk];
      dst.insert(dst.end(), v.begin(), v.end());
    }
    for (const auto& [lk, v] : classes.large1) {
      auto& dst = t1[lk];
      dst.insert(dst.end(), v.begin(), v.end());
    }
    const double weight = std::pow(kRho, -0.5) * out.tau;
    for (const auto& [lk, v] : t1) {
      const double n = form_matrix(collection.subset(v), cache).norm();
      if (weight > 0.0) out.y_decay_constant = std::max(out.y_decay_constant, n / weight);
    }
  }
  out.classes.push_back(report_class("large3", std::nullopt, 0, large3, cache));
  out.classes.push_back(report_class("large4", std::nullopt, 0, large4, cache));
  out.classes.push_back(report_class("large5", std::nullopt, 0, large5, cache));

  // Mutual orthogonality of {Q_{L,t}}_L at fixed t, and of the small1 family:
  // disjoint q2 sets, disjoint tilde sets, each q1 in at most two families;
  // then the sqrt(2) aggregation of spectral norms.
  out.orthogonality_structural = true;
  std::map<int, std::vector<std::vector<IntervalPair>>> union_by_t;
  {
    std::map<DyadicInterval, std::vector<IntervalPair>> t1;
    for (const auto& [lk, v] : classes.small1) {
      auto& dst = t1[lk];
      dst.insert(dst.end(), v.begin(), v.end());
    }
    for (const auto& [lk, v] : classes.large1) {
      auto& dst = t1[lk];
      dst.insert(dst.end(), v.begin(), v.end());
    }
    for (auto& [lk, v] : t1) union_by_t[1].push_back(v);
  }
  for (const auto& [key, slot] : classes.large2) union_by_t[key.second].push_back(slot.all());

  auto check_family = [&](const std::vector<std::vector<IntervalPair>>& fam) {
    std::set<DyadicInterval> seen_q2, seen_tilde;
    std::map<DyadicInterval, int> q1_count;
    double max_norm = 0.0;
    std::vector<IntervalPair> all;
    for (const auto& v : fam) {
      const PairCollection cls = collection.subset(v);
      for (const DyadicInterval& j : cls.q2_set())
        if (!seen_q2.insert(j).second) out.orthogonality_structural = false;
      for (const DyadicInterval& td : cls.tilde_set())
        if (!seen_tilde.insert(td).second) out.orthogonality_structural = false;
      for (const DyadicInterval& q1 : cls.q1_set())
        if (++q1_count[q1] > 2) out.orthogonality_structural = false;
      max_norm = std::max(max_norm, form_matrix(cls, cache).norm());
      all.insert(all.end(), v.begin(), v.end());
    }
    const double union_norm = form_matrix(collection.subset(all), cache).norm();
    out.subadd_excess = std::max(out.subadd_excess, union_norm - std::sqrt(2.0) * max_norm);
  };
  for (const auto& [t, fam] : union_by_t)
    if (fam.size() > 1) check_family(fam);
  {
    std::vector<std::vector<IntervalPair>> fam;
    for (const auto& [lk, v] : classes.small1) fam.push_back(v);
    if (fam.size() > 1) check_family(fam);
  }

  out.node_constant =
      std::max(0.0, (out.norm - (1.0 + std::sqrt(2.0)) * small_sup) / out.tau);
  return out;
}

namespace {

void decompose_rec(const PairCollection& collection, PairingCache& cache, double threshold,
                   const std::string& label, int level, DecompositionNode& node,
                   DecompositionRun& run) {
  node.label = label;
  node.pair_count = collection.size();
  node.tau = collection_size(collection, cache).value;
  node.norm = form_matrix(collection, cache).norm();
  if (collection.empty() || node.tau < threshold) {
    node.leaf = true;
    if (node.tau > 0.0)
      run.c_star = std::max(run.c_star, node.norm / node.tau);
    else if (node.norm > 1e-12)
      throw std::runtime_error("decompose_until: leaf with zero size but positive norm");
    return;
  }
  node.leaf = false;
  run.depth_applied = std::max(run.depth_applied, level);
  SizeLemmaReport report = verify_size_lemma(collection, cache);
  run.c_star = std::max(run.c_star, report.node_constant);
  run.max_node_constant = std::max(run.max_node_constant, report.node_constant);
  const double shrink_cap = node.tau / 4.0 * (1.0 + 1e-12);
  for (const auto& cls : report.small_classes) {
    DecompositionNode child;
    decompose_rec(cls.pairs, cache, threshold, cls.name, level + 1, child, run);
    if (child.tau > shrink_cap)
      throw std::runtime_error("decompose_until: size failed to shrink by the factor 4");
    node.children.push_back(std::move(child));
  }
  node.report = std::move(report);
}

}  // namespace

DecompositionRun decompose_until(const PairCollection& collection, PairingCache& cache,
                                 double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("decompose_until: threshold must be positive");
  DecompositionRun run;
  run.threshold = threshold;
  decompose_rec(collection, cache, threshold, "root", 1, run.root, run);
  const double tau0 = run.root.tau;
  run.depth_bound =
      tau0 >= threshold ? static_cast<int>(std::ceil(std::log(tau0 / threshold) / std::log(4.0))) + 1
                        : 1;
  if (run.depth_applied > run.depth_bound)
    throw std::runtime_error("decompose_until: recursion exceeded the depth bound");
  run.zeta_bound = 4.0 * run.c_star * tau0 * (1.0 + 1e-6);
  run.zeta_ok = run.root.norm <= run.zeta_bound + 1e-12;
  return run;
}

}  // namespace tw

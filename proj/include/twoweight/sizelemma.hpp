#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "twoweight/forms.hpp"

namespace tw {

inline constexpr double kRho = 17.0 / 16.0;

/// Maximal subintervals of the root whose Poisson-energy product beats the
/// threshold 10 c0 H^2 sigma(I).
struct EnergyStopping {
  DyadicInterval root;
  double c0 = 0.0;
  double h_const = 0.0;
  std::vector<DyadicInterval> family;

  struct MemberInfo {
    DyadicInterval interval;
    double lhs = 0.0;      // P(sigma restricted to root, I)^2 E(w,I)^2 w(I)
    double lhs_alt = 0.0;  // complement reading P(sigma(root - I), I)^2 E(w,I)^2 w(I)
    double sigma_mass = 0.0;
    double w_mass = 0.0;
  };
  std::vector<MemberInfo> info;

  double sigma_union(const AtomicMeasure& sigma) const;
};

EnergyStopping energy_stopping(const MeasurePair& pair, const DyadicInterval& root, double c0,
                               double h_const);

/// The recursively selected interval family driving the partition, with tent
/// cache and the forest structure over its members.
struct LCollection {
  std::vector<DyadicInterval> members;  // sorted
  std::set<DyadicInterval> member_set;
  std::map<DyadicInterval, int> generation;
  std::map<DyadicInterval, DyadicInterval> up;  // strict parent within the family
  std::map<DyadicInterval, std::vector<DyadicInterval>> kids;
  std::vector<DyadicInterval> maximal;
  TentMap tents;
  int generations = 0;

  double tent(const DyadicInterval& interval) const {
    auto it = tents.find(interval);
    return it == tents.end() ? 0.0 : it->second;
  }
  bool contains(const DyadicInterval& interval) const { return member_set.count(interval) > 0; }
  /// Minimal member containing the interval (non-strict), if any.
  std::optional<DyadicInterval> min_ancestor(const DyadicInterval& interval, int root_level) const;
  /// Strict parent of a member, if any.
  std::optional<DyadicInterval> strict_parent(const DyadicInterval& member) const;
};

LCollection build_l(const PairCollection& collection, PairingCache& cache);

/// Max over members L and t >= 1 of the t-generation tent sum against
/// rho^-t tent(L); at most 1 by construction.
double check_ddecay(const LCollection& l);

/// The partitioned classes of the Size Lemma.
struct PartitionClasses {
  std::map<DyadicInterval, std::vector<IntervalPair>> small1;  // per L, t = 1, tilde != L
  std::vector<IntervalPair> small2;                            // q2 without an L-ancestor
  std::map<DyadicInterval, std::vector<IntervalPair>> large1;  // per L, t = 1, tilde == L
  struct LargeT {
    std::vector<IntervalPair> sub1, sub2, sub3;
    std::vector<IntervalPair> all() const;
  };
  std::map<std::pair<DyadicInterval, int>, LargeT> large2;  // per (L, t), t >= 2
  std::vector<IntervalPair> large3, large4, large5;

  std::size_t total() const;
};

PartitionClasses partition(const PairCollection& collection, const LCollection& l);

struct ClassReport {
  std::string name;
  std::optional<DyadicInterval> l;
  int t = 0;
  std::size_t count = 0;
  double size = 0.0;
  double norm = 0.0;
};

/// Everything verified and measured at one Size Lemma application.
struct SizeLemmaReport {
  double tau = 0.0;
  std::size_t pair_count = 0;
  double norm = 0.0;  // direct spectral norm of the whole form
  std::size_t l_count = 0;
  int l_generations = 0;
  std::size_t l_member_bound = 0;  // |tilde(Q1) union Q2|
  double ddecay_max = 0.0;
  double node_constant = 0.0;
  double small_sup_norm = 0.0;
  double small_size_max = 0.0;  // max small-class size, to compare against tau/4
  double y_decay_constant = 0.0;
  double subadd_excess = 0.0;  // max over t of B_union - sqrt(2) max_L B_{L,t}
  bool partition_exact = false;
  bool orthogonality_structural = false;
  bool trange_ok = false;
  std::vector<ClassReport> classes;

  struct SmallClass {
    std::string name;
    PairCollection pairs;
  };
  std::vector<SmallClass> small_classes;  // recursion inputs, nonempty only
};

SizeLemmaReport verify_size_lemma(const PairCollection& collection, PairingCache& cache);

struct DecompositionNode {
  std::string label;
  double tau = 0.0;
  std::size_t pair_count = 0;
  double norm = 0.0;
  bool leaf = true;
  std::optional<SizeLemmaReport> report;
  std::vector<DecompositionNode> children;
};

struct DecompositionRun {
  DecompositionNode root;
  double threshold = 0.0;
  int depth_applied = 0;  // levels at which the lemma was applied
  int depth_bound = 0;    // ceil(log4(tau0/threshold)) + 1
  double c_star = 0.0;    // max node constant, leaves entering as norm/tau
  double zeta_bound = 0.0;
  bool zeta_ok = false;
  double max_node_constant = 0.0;  // internal nodes only
};

/// Applies the Size Lemma recursively to every small class until sizes fall
/// below the threshold. Throws when a recursion step fails to shrink the size
/// by the factor 4.
DecompositionRun decompose_until(const PairCollection& collection, PairingCache& cache,
                                 double threshold);

}  // namespace tw

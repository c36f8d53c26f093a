#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tw {

/// Parameters of the dyadic grid on [0,1): finest scale, goodness separation
/// exponent r and goodness exponent eps.
struct GridConfig {
  int max_depth = 12;        // K: finest scale is 2^-K
  int separation = 2;        // r
  double goodness_eps = 0.25;  // eps in (0, 1/2)

  void validate() const {
    if (separation < 1) throw std::invalid_argument("GridConfig: separation r must be >= 1");
    if (max_depth < separation + 2)
      throw std::invalid_argument("GridConfig: max_depth K must be >= r + 2");
    if (max_depth > 40) throw std::invalid_argument("GridConfig: max_depth K too large");
    if (!(goodness_eps > 0.0 && goodness_eps < 0.5))
      throw std::invalid_argument("GridConfig: goodness_eps must lie in (0, 1/2)");
  }
};

/// Half-open dyadic interval [j*2^-n, (j+1)*2^-n) inside [0,1).
class DyadicInterval {
 public:
  DyadicInterval() : level_(0), index_(0) {}
  DyadicInterval(int level, std::uint64_t index) : level_(level), index_(index) {
    if (level < 0 || level > 62) throw std::invalid_argument("DyadicInterval: bad level");
    if (index >= (std::uint64_t{1} << level) && level > 0)
      throw std::invalid_argument("DyadicInterval: index out of range");
    if (level == 0 && index != 0) throw std::invalid_argument("DyadicInterval: index out of range");
  }

  static DyadicInterval root() { return DyadicInterval(0, 0); }

  int level() const { return level_; }
  std::uint64_t index() const { return index_; }
  double length() const { return std::ldexp(1.0, -level_); }
  double left() const { return std::ldexp(static_cast<double>(index_), -level_); }
  double right() const { return std::ldexp(static_cast<double>(index_ + 1), -level_); }
  double center() const { return std::ldexp(static_cast<double>(2 * index_ + 1), -(level_ + 1)); }

  bool is_root() const { return level_ == 0; }

  DyadicInterval parent() const {
    if (level_ == 0) throw std::invalid_argument("DyadicInterval: root has no parent");
    return DyadicInterval(level_ - 1, index_ >> 1);
  }

  /// Ancestor at the given coarser level (level <= this->level()).
  DyadicInterval ancestor(int level) const {
    if (level < 0 || level > level_) throw std::invalid_argument("DyadicInterval: bad ancestor level");
    return DyadicInterval(level, index_ >> (level_ - level));
  }

  DyadicInterval left_child() const { return DyadicInterval(level_ + 1, index_ << 1); }
  DyadicInterval right_child() const { return DyadicInterval(level_ + 1, (index_ << 1) | 1); }

  /// Non-strict containment: other subset-or-equal of *this.
  bool contains(const DyadicInterval& other) const {
    return level_ <= other.level_ && (other.index_ >> (other.level_ - level_)) == index_;
  }
  bool strictly_contains(const DyadicInterval& other) const {
    return level_ < other.level_ && contains(other);
  }
  bool contains_point(double x) const { return x >= left() && x < right(); }

  /// Distance from a point to the closed interval.
  double distance_to(double x) const {
    if (x < left()) return left() - x;
    if (x > right()) return x - right();
    return 0.0;
  }

  auto operator<=>(const DyadicInterval&) const = default;

  std::string to_string() const {
    return "I(" + std::to_string(level_) + "," + std::to_string(index_) + ")";
  }

 private:
  int level_;
  std::uint64_t index_;
};

/// The two children of I, ordered left/right. Errors past the grid depth.
inline std::pair<DyadicInterval, DyadicInterval> children(const DyadicInterval& interval,
                                                          const GridConfig& cfg) {
  if (interval.level() >= cfg.max_depth)
    throw std::domain_error("children: interval already at the finest scale");
  return {interval.left_child(), interval.right_child()};
}

/// The unique child of `outer` containing `inner`; requires inner to be a
/// proper subinterval of outer.
inline DyadicInterval child_containing(const DyadicInterval& outer, const DyadicInterval& inner) {
  if (inner == outer) throw std::invalid_argument("child_containing: intervals are equal");
  if (!outer.contains(inner)) throw std::invalid_argument("child_containing: not a subinterval");
  return inner.ancestor(outer.level() + 1);
}

/// Goodness: J keeps distance |J|^eps * |A|^(1-eps) from the boundary of every
/// strict dyadic superinterval A with |A| >= 2^(r-1) |J|. Ties at equality count
/// as separated.
inline bool is_good(const DyadicInterval& interval, const GridConfig& cfg) {
  const int n = interval.level();
  int top = n - cfg.separation + 1;  // coarsest-to-finest ancestor levels allowed
  if (top > n - 1) top = n - 1;      // strict superintervals only
  for (int m = 0; m <= top; ++m) {
    const DyadicInterval anc = interval.ancestor(m);
    const std::uint64_t span = std::uint64_t{1} << (n - m);  // |A| in units of |J|
    const std::uint64_t off = interval.index() - (anc.index() << (n - m));
    const std::uint64_t dist_units = std::min(off, span - 1 - off);
    // Required: dist >= |J|^eps |A|^(1-eps), i.e. dist_units >= 2^((n-m)(1-eps)).
    const double required = std::exp2((n - m) * (1.0 - cfg.goodness_eps));
    if (static_cast<double>(dist_units) < required) return false;
  }
  return true;
}

/// Containment with a scale gap of 2^r, no goodness requirement.
inline bool scale_contained(const DyadicInterval& inner, const DyadicInterval& outer, int r) {
  return outer.contains(inner) && inner.level() >= outer.level() + r;
}

/// The relation "inner deeply inside outer": containment, 2^r scale gap, and
/// goodness of the inner interval.
inline bool deeply_contained(const DyadicInterval& inner, const DyadicInterval& outer,
                             const GridConfig& cfg) {
  return scale_contained(inner, outer, cfg.separation) && is_good(inner, cfg);
}

/// All dyadic intervals of [0,1) down to cfg.max_depth in (level, index) order.
std::vector<DyadicInterval> all_intervals(const GridConfig& cfg);

}  // namespace tw

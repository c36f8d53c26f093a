#include "twoweight/constants.hpp"

#include <algorithm>
#include <cmath>

#include "twoweight/summation.hpp"

namespace tw {

std::vector<std::int64_t> candidate_endpoints(const MeasurePair& pair) {
  const int depth = pair.sigma().depth();
  std::vector<std::int64_t> pts{0, std::int64_t{1} << depth};
  for (const AtomicMeasure* nu : {&pair.sigma(), &pair.w()})
    for (const Atom& a : nu->atoms()) {
      pts.push_back(a.cell);
      pts.push_back(a.cell + 1);
    }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

IntervalWitness a2_constant(const MeasurePair& pair) {
  const int depth = pair.sigma().depth();
  const auto pts = candidate_endpoints(pair);
  IntervalWitness best;
  best.interval = {0, std::int64_t{1} << depth, depth};
  for (std::size_t ai = 0; ai < pts.size(); ++ai) {
    for (std::size_t bi = ai + 1; bi < pts.size(); ++bi) {
      const LatticeInterval candidate{pts[ai], pts[bi], depth};
      const double value = poisson(pair.sigma(), candidate) * poisson(pair.w(), candidate);
      if (value > best.value) {
        best.value = value;
        best.interval = candidate;
      }
    }
  }
  return best;
}

namespace {

/// One pass of the testing sweep for a fixed left endpoint: extend the right
/// endpoint through the remaining candidates, maintaining the transform of
/// 1_I * source at every target atom inside I.
struct TestingSweep {
  const AtomicMeasure& source;  // measure inside the transform
  const AtomicMeasure& target;  // measure the square is integrated against
  const TruncationWindow& win;

  std::vector<double> field;  // H(1_I source) at target atoms currently inside I
  std::size_t src_begin = 0, src_end = 0;
  std::size_t tgt_begin = 0, tgt_end = 0;
  double src_mass = 0.0;
  double weighted_square = 0.0;

  void add_source_atom(std::size_t j) {
    const double y = source.position(j);
    const double m = source.mass_at(j);
    src_mass += m;
    for (std::size_t i = tgt_begin; i < tgt_end; ++i) {
      const double x = target.position(i);
      if (!win.retains(std::abs(y - x))) continue;
      const double delta = m / (y - x);
      const double old = field[i];
      field[i] += delta;
      weighted_square += target.mass_at(i) * (2.0 * old * delta + delta * delta);
    }
  }

  void add_target_atom(std::size_t i) {
    const double x = target.position(i);
    CompensatedSum s;
    for (std::size_t j = src_begin; j < src_end; ++j) {
      const double y = source.position(j);
      if (win.retains(std::abs(y - x))) s.add(source.mass_at(j) / (y - x));
    }
    field[i] = s.value();
    weighted_square += target.mass_at(i) * field[i] * field[i];
  }
};

/// Exact re-evaluation of the testing quotient at one candidate interval,
/// in canonical summation order.
double testing_value_at(const AtomicMeasure& source, const AtomicMeasure& target,
                        const LatticeInterval& candidate, const TruncationWindow& win) {
  const double denom = source.mass(candidate);
  if (!(denom > 0.0)) return 0.0;
  auto [tfirst, tlast] = target.atom_range(candidate);
  auto [sfirst, slast] = source.atom_range(candidate);
  CompensatedSum total;
  for (std::size_t i = tfirst; i < tlast; ++i) {
    const double x = target.position(i);
    CompensatedSum h;
    for (std::size_t j = sfirst; j < slast; ++j) {
      const double y = source.position(j);
      if (win.retains(std::abs(y - x))) h.add(source.mass_at(j) / (y - x));
    }
    total.add(target.mass_at(i) * h.value() * h.value());
  }
  return total.value() / denom;
}

IntervalWitness testing_impl(const AtomicMeasure& source, const AtomicMeasure& target, int depth,
                             const std::vector<std::int64_t>& pts, const TruncationWindow& win) {
  IntervalWitness best;
  best.interval = {0, std::int64_t{1} << depth, depth};
  double best_sq = -1.0;
  for (std::size_t ai = 0; ai + 1 < pts.size(); ++ai) {
    TestingSweep sweep{source, target, win};
    sweep.field.assign(target.size(), 0.0);
    const LatticeInterval start{pts[ai], pts[ai], depth};
    auto sr = source.atom_range(start);
    auto tr = target.atom_range(start);
    sweep.src_begin = sweep.src_end = sr.first;
    sweep.tgt_begin = sweep.tgt_end = tr.first;
    for (std::size_t bi = ai + 1; bi < pts.size(); ++bi) {
      const LatticeInterval candidate{pts[ai], pts[bi], depth};
      const auto src_to = source.atom_range(candidate).second;
      const auto tgt_to = target.atom_range(candidate).second;
      while (sweep.tgt_end < tgt_to) sweep.add_target_atom(sweep.tgt_end++);
      while (sweep.src_end < src_to) sweep.add_source_atom(sweep.src_end++);
      if (!(sweep.src_mass > 0.0)) continue;
      const double value_sq = sweep.weighted_square / sweep.src_mass;
      if (value_sq > best_sq) {
        best_sq = value_sq;
        best.interval = candidate;
      }
    }
  }
  best.value = std::sqrt(std::max(0.0, testing_value_at(source, target, best.interval, win)));
  return best;
}

}  // namespace

IntervalWitness testing_constant(const MeasurePair& pair, TestingDirection direction,
                                 const TruncationWindow& win) {
  win.validate();
  const auto pts = candidate_endpoints(pair);
  const int depth = pair.sigma().depth();
  if (direction == TestingDirection::SigmaToW)
    return testing_impl(pair.sigma(), pair.w(), depth, pts, win);
  return testing_impl(pair.w(), pair.sigma(), depth, pts, win);
}

IntervalWitness testing_constant(const MeasurePair& pair, TestingDirection direction) {
  return testing_constant(pair, direction, pair.default_window());
}

Eigen::MatrixXd transform_matrix(const MeasurePair& pair, const TruncationWindow& win) {
  win.validate();
  const AtomicMeasure& sigma = pair.sigma();
  const AtomicMeasure& w = pair.w();
  Eigen::MatrixXd m(w.size(), sigma.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double x = w.position(i);
    const double sw = std::sqrt(w.mass_at(i));
    for (std::size_t j = 0; j < sigma.size(); ++j) {
      const double y = sigma.position(j);
      const double gap = std::abs(y - x);
      m(i, j) = win.retains(gap) ? sw * std::sqrt(sigma.mass_at(j)) / (y - x) : 0.0;
    }
  }
  return m;
}

NormEstimate norm_estimate(const MeasurePair& pair, const TruncationWindow& win) {
  NormEstimate out;
  if (pair.sigma().is_empty() || pair.w().is_empty()) {
    out.power_converged = true;
    return out;
  }
  const Eigen::MatrixXd m = transform_matrix(pair, win);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues().size() > 0) {
    out.value = svd.singularValues()(0);
    Eigen::VectorXd right = svd.matrixV().col(0);
    Eigen::VectorXd left = svd.matrixU().col(0);
    // Fix the sign so reports are reproducible across backends.
    for (Eigen::Index i = 0; i < right.size(); ++i) {
      if (right(i) != 0.0) {
        if (right(i) < 0.0) {
          right = -right;
          left = -left;
        }
        break;
      }
    }
    out.right_singular.assign(right.data(), right.data() + right.size());
    out.left_singular.assign(left.data(), left.data() + left.size());
  }
  const PowerIterationResult power = power_iteration_norm(m);
  out.power_value = power.value;
  out.power_iterations = power.iterations;
  out.power_converged = power.converged;
  out.power_restarted = power.restarted;
  return out;
}

ConstantsReport constants_report(const MeasurePair& pair) {
  return constants_report(pair, pair.default_window());
}

ConstantsReport constants_report(const MeasurePair& pair, const TruncationWindow& win) {
  ConstantsReport report;
  report.a2_witness = a2_constant(pair);
  report.a2 = report.a2_witness.value;
  report.testing_sw_witness = testing_constant(pair, TestingDirection::SigmaToW, win);
  report.testing_sw = report.testing_sw_witness.value;
  report.testing_ws_witness = testing_constant(pair, TestingDirection::WToSigma, win);
  report.testing_ws = report.testing_ws_witness.value;
  report.norm_detail = norm_estimate(pair, win);
  report.norm = report.norm_detail.value;
  report.h_const = std::sqrt(report.a2) + std::max(report.testing_sw, report.testing_ws);
  report.ratio = report.h_const > 0.0 ? report.norm / report.h_const : 0.0;
  return report;
}

double theorem_ratio(const ConstantsReport& report) {
  if (!(report.h_const > 0.0))
    throw std::domain_error("theorem_ratio: undefined, h_const is zero");
  return report.norm / report.h_const;
}

}  // namespace tw

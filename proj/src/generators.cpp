#include "twoweight/generators.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace tw {

MeasureKind measure_kind_from_string(const std::string& name) {
  if (name == "uniform-random") return MeasureKind::UniformRandom;
  if (name == "cantor") return MeasureKind::Cantor;
  if (name == "lattice") return MeasureKind::Lattice;
  if (name == "adversarial-spike") return MeasureKind::AdversarialSpike;
  throw std::invalid_argument("unknown measure kind: " + name);
}

std::string to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::UniformRandom: return "uniform-random";
    case MeasureKind::Cantor: return "cantor";
    case MeasureKind::Lattice: return "lattice";
    case MeasureKind::AdversarialSpike: return "adversarial-spike";
  }
  return "?";
}

namespace {

std::vector<std::int64_t> draw_cells(Rng& rng, int count, std::int64_t cells,
                                     std::set<std::int64_t>& taken) {
  std::vector<std::int64_t> out;
  while (static_cast<int>(out.size()) < count) {
    const std::int64_t c = rng.below(cells);
    if (taken.insert(c).second) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

AtomicMeasure from_cells(int depth, const std::vector<std::int64_t>& cells, Rng& rng) {
  std::vector<Atom> atoms;
  atoms.reserve(cells.size());
  for (std::int64_t c : cells) atoms.push_back({c, rng.uniform(0.1, 1.0)});
  return AtomicMeasure(depth, std::move(atoms));
}

GridConfig with_depth(GridConfig grid, int depth) {
  grid.max_depth = depth;
  grid.validate();
  return grid;
}

}  // namespace

MeasurePair gen_uniform_random(std::uint64_t seed, int n_sigma, int n_w, int depth,
                               GridConfig grid) {
  Rng rng(seed);
  const std::int64_t cells = std::int64_t{1} << depth;
  if (n_sigma + n_w > cells)
    throw std::invalid_argument("gen_uniform_random: more atoms than grid cells");
  std::set<std::int64_t> taken;
  const auto sigma_cells = draw_cells(rng, n_sigma, cells, taken);
  const auto w_cells = draw_cells(rng, n_w, cells, taken);
  AtomicMeasure sigma = from_cells(depth, sigma_cells, rng);
  AtomicMeasure w = from_cells(depth, w_cells, rng);
  return MeasurePair(std::move(sigma), std::move(w), with_depth(grid, depth));
}

MeasurePair gen_lattice(int atoms, int depth, GridConfig grid) {
  const std::int64_t cells = std::int64_t{1} << depth;
  if (2 * atoms > cells) throw std::invalid_argument("gen_lattice: more atoms than grid cells");
  std::vector<Atom> sigma_atoms, w_atoms;
  for (int i = 0; i < atoms; ++i) {
    const std::int64_t sigma_cell = (2 * i) * cells / (2 * atoms);
    std::int64_t w_cell = (2 * i + 1) * cells / (2 * atoms);
    if (w_cell == sigma_cell) ++w_cell;
    sigma_atoms.push_back({sigma_cell, 1.0});
    w_atoms.push_back({w_cell, 1.0});
  }
  return MeasurePair(AtomicMeasure(depth, sigma_atoms), AtomicMeasure(depth, w_atoms),
                     with_depth(grid, depth));
}

MeasurePair gen_cantor(int level, GridConfig grid) {
  if (level < 2) throw std::invalid_argument("gen_cantor: level must be >= 2");
  const int depth = 2 * level;  // retained cells have length 4^-level
  // Iterate: keep the outer quarters of each retained interval.
  std::vector<std::pair<std::int64_t, std::int64_t>> kept{{0, std::int64_t{1} << depth}};
  for (int step = 0; step < level; ++step) {
    std::vector<std::pair<std::int64_t, std::int64_t>> next;
    for (const auto& [lo, hi] : kept) {
      const std::int64_t quarter = (hi - lo) / 4;
      next.push_back({lo, lo + quarter});
      next.push_back({hi - quarter, hi});
    }
    kept = std::move(next);
  }
  // After `level` steps every retained interval is a single depth-2*level cell.
  std::set<std::int64_t> cantor_cells;
  std::vector<Atom> sigma_atoms;
  const double sigma_mass = std::ldexp(1.0, -level);
  for (const auto& [lo, hi] : kept) {
    sigma_atoms.push_back({lo, sigma_mass});
    cantor_cells.insert(lo);
  }
  std::sort(sigma_atoms.begin(), sigma_atoms.end(),
            [](const Atom& a, const Atom& b) { return a.cell < b.cell; });
  std::vector<Atom> w_atoms;
  const double w_mass = std::ldexp(1.0, -depth);
  for (std::int64_t c = 0; c < (std::int64_t{1} << depth); ++c)
    if (!cantor_cells.count(c)) w_atoms.push_back({c, w_mass});
  return MeasurePair(AtomicMeasure(depth, sigma_atoms), AtomicMeasure(depth, w_atoms),
                     with_depth(grid, depth));
}

MeasurePair gen_spike(std::uint64_t seed, int background_atoms, int depth, GridConfig grid) {
  Rng rng(seed);
  const std::int64_t cells = std::int64_t{1} << depth;
  const std::int64_t spike = cells / 2 + rng.below(cells / 4);
  std::set<std::int64_t> taken{spike, spike + 1};
  auto sigma_cells = draw_cells(rng, background_atoms, cells, taken);
  auto w_cells = draw_cells(rng, background_atoms, cells, taken);
  sigma_cells.push_back(spike);
  w_cells.push_back(spike + 1);
  std::sort(sigma_cells.begin(), sigma_cells.end());
  std::sort(w_cells.begin(), w_cells.end());
  std::vector<Atom> sigma_atoms, w_atoms;
  for (std::int64_t c : sigma_cells)
    sigma_atoms.push_back({c, c == spike ? 1.0 : 1e-3 * rng.uniform(0.5, 1.0)});
  for (std::int64_t c : w_cells)
    w_atoms.push_back({c, c == spike + 1 ? 1.0 : 1e-3 * rng.uniform(0.5, 1.0)});
  return MeasurePair(AtomicMeasure(depth, sigma_atoms), AtomicMeasure(depth, w_atoms),
                     with_depth(grid, depth));
}

MeasurePair generate_pair(const GenParams& params) {
  switch (params.kind) {
    case MeasureKind::UniformRandom:
      return gen_uniform_random(params.seed, params.atoms, params.atoms, params.depth, params.grid);
    case MeasureKind::Lattice:
      return gen_lattice(params.atoms, params.depth, params.grid);
    case MeasureKind::Cantor:
      return gen_cantor(params.cantor_level, params.grid);
    case MeasureKind::AdversarialSpike:
      return gen_spike(params.seed, params.atoms, params.depth, params.grid);
  }
  throw std::invalid_argument("generate_pair: unknown kind");
}

AtomicMeasure gen_measure(std::uint64_t seed, int atoms, int depth) {
  Rng rng(seed);
  std::set<std::int64_t> taken;
  const auto cells = draw_cells(rng, atoms, std::int64_t{1} << depth, taken);
  return from_cells(depth, cells, rng);
}

HaarCoefficients random_coefficients(Rng& rng, const AtomicMeasure& nu,
                                     const std::vector<DyadicInterval>& support) {
  HaarCoefficients out;
  for (const DyadicInterval& interval : support)
    if (is_splittable(nu, interval)) out.set_coefficient(interval, rng.symmetric());
  return out;
}

namespace {

bool inside_any(const DyadicInterval& interval, const std::vector<DyadicInterval>& family) {
  for (const DyadicInterval& s : family)
    if (s.contains(interval)) return true;
  return false;
}

}  // namespace

double max_average_outside(const std::vector<double>& values, const AtomicMeasure& nu,
                           const std::vector<DyadicInterval>& shelters) {
  double worst = 0.0;
  for (const DyadicInterval& interval : active_intervals(nu, 1)) {
    if (inside_any(interval, shelters)) continue;
    worst = std::max(worst, std::abs(average(values, nu, interval)));
  }
  return worst;
}

HaarCoefficients uniform_f(Rng& rng, const MeasurePair& pair,
                           const std::vector<DyadicInterval>& shelters) {
  const AtomicMeasure& sigma = pair.sigma();
  HaarCoefficients f;
  for (const DyadicInterval& interval : active_intervals(sigma, 2)) {
    if (!is_splittable(sigma, interval)) continue;
    if (!is_good(interval, pair.cfg())) continue;
    if (inside_any(interval, shelters)) continue;
    f.set_coefficient(interval, rng.symmetric());
  }
  // One global rescale enforces the bounded averages exactly, since the
  // averages are linear in the coefficients.
  std::vector<double> values = reconstruct(f, sigma);
  const double worst = max_average_outside(values, sigma, shelters);
  if (worst > 1.0) {
    HaarCoefficients scaled;
    for (const auto& [interval, c] : f.coefficients())
      scaled.set_coefficient(interval, c / worst);
    f = scaled;
    values = reconstruct(f, sigma);
    if (max_average_outside(values, sigma, shelters) > 1.0 + 1e-12)
      throw std::runtime_error("uniform_f: rescaled averages still exceed 1");
  }
  return f;
}

HaarCoefficients adapted_g(Rng& rng, const AtomicMeasure& w,
                           const std::vector<DyadicInterval>& shelters, const GridConfig& cfg) {
  (void)cfg;
  HaarCoefficients g;
  for (const DyadicInterval& interval : active_intervals(w, 2)) {
    if (!is_splittable(w, interval)) continue;
    if (inside_any(interval, shelters)) continue;
    g.set_coefficient(interval, rng.symmetric());
  }
  return g;
}

}  // namespace tw

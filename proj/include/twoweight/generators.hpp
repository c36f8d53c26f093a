#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "twoweight/forms.hpp"
#include "twoweight/measure.hpp"

namespace tw {

/// Deterministic RNG: mt19937_64 output mapped to doubles by hand, so the
/// same seed yields the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double symmetric() { return 2.0 * uniform() - 1.0; }
  std::uint64_t bits() { return eng_(); }
  std::int64_t below(std::int64_t n) {
    return static_cast<std::int64_t>(eng_() % static_cast<std::uint64_t>(n));
  }

 private:
  std::mt19937_64 eng_;
};

enum class MeasureKind { UniformRandom, Cantor, Lattice, AdversarialSpike };

MeasureKind measure_kind_from_string(const std::string& name);
std::string to_string(MeasureKind kind);

struct GenParams {
  MeasureKind kind = MeasureKind::UniformRandom;
  std::uint64_t seed = 1;
  int atoms = 16;      // per measure, where applicable
  int depth = 12;      // grid depth K
  int cantor_level = 3;  // Cantor construction depth d (forces K = 2d)
  GridConfig grid;     // separation/eps defaults; max_depth overridden per kind
};

MeasurePair generate_pair(const GenParams& params);

MeasurePair gen_uniform_random(std::uint64_t seed, int n_sigma, int n_w, int depth,
                               GridConfig grid = {});
MeasurePair gen_lattice(int atoms, int depth, GridConfig grid = {});
MeasurePair gen_cantor(int level, GridConfig grid = {});
MeasurePair gen_spike(std::uint64_t seed, int background_atoms, int depth, GridConfig grid = {});

/// Random single measure for the Haar algebra suites.
AtomicMeasure gen_measure(std::uint64_t seed, int atoms, int depth);

/// Haar coefficients drawn on the splittable intervals accepted by `eligible`.
HaarCoefficients random_coefficients(Rng& rng, const AtomicMeasure& nu,
                                     const std::vector<DyadicInterval>& support);

/// A mean-zero function with good Haar support outside the shelters, rescaled
/// so that |E_I f| <= 1 on every interval not inside a shelter; the bounded
/// averages are re-verified after scaling.
HaarCoefficients uniform_f(Rng& rng, const MeasurePair& pair,
                           const std::vector<DyadicInterval>& shelters);

/// Mean-zero coefficients vanishing on intervals inside shelters (constant on
/// every shelter).
HaarCoefficients adapted_g(Rng& rng, const AtomicMeasure& w,
                           const std::vector<DyadicInterval>& shelters, const GridConfig& cfg);

/// Largest |E_I f| over intervals not inside any shelter (positive mass only).
double max_average_outside(const std::vector<double>& values, const AtomicMeasure& nu,
                           const std::vector<DyadicInterval>& shelters);

}  // namespace tw

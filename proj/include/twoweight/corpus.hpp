#pragma once

#include <string>
#include <vector>

#include "twoweight/generators.hpp"

namespace tw {

struct CorpusEntry {
  std::string label;
  GenParams params;

  MeasurePair make() const { return generate_pair(params); }
};

/// The 50-instance constants corpus (uniform-random, lattice, Cantor,
/// adversarial spikes; up to 200 atoms per measure).
std::vector<CorpusEntry> constants_corpus();

/// Smaller instances driving the decomposition suites.
std::vector<CorpusEntry> decompose_corpus();

/// Seeds of the 50 random single measures for the Haar algebra suite (<= 64
/// atoms, K = 12).
std::vector<std::uint64_t> haar_corpus_seeds();

}  // namespace tw

#include "twoweight/corpus.hpp"

namespace tw {

namespace {

CorpusEntry entry(std::string label, MeasureKind kind, std::uint64_t seed, int atoms, int depth,
                  int cantor_level = 0) {
  CorpusEntry e;
  e.label = std::move(label);
  e.params.kind = kind;
  e.params.seed = seed;
  e.params.atoms = atoms;
  e.params.depth = depth;
  e.params.cantor_level = cantor_level;
  return e;
}

}  // namespace

std::vector<CorpusEntry> constants_corpus() {
  std::vector<CorpusEntry> out;
  const int sizes[] = {16, 24, 32, 48, 64, 96, 128, 200};
  for (int i = 0; i < 16; ++i) {
    const int atoms = sizes[i % 8];
    out.push_back(entry("uniform-" + std::to_string(i), MeasureKind::UniformRandom, 101 + i,
                        atoms, 12));
  }
  const int lattice_sizes[] = {4, 8, 12, 16, 24, 32, 48, 64, 96, 128, 160, 200};
  for (int i = 0; i < 12; ++i)
    out.push_back(entry("lattice-" + std::to_string(i), MeasureKind::Lattice, 0, lattice_sizes[i],
                        12));
  for (int i = 0; i < 10; ++i) {
    const int level = 2 + (i % 4);  // Cantor depths 2..5
    out.push_back(
        entry("cantor-" + std::to_string(i), MeasureKind::Cantor, 0, 0, 2 * level, level));
  }
  for (int i = 0; i < 12; ++i) {
    const int atoms = sizes[i % 8] / 2;
    out.push_back(entry("spike-" + std::to_string(i), MeasureKind::AdversarialSpike, 301 + i,
                        atoms, 12));
  }
  return out;
}

std::vector<CorpusEntry> decompose_corpus() {
  std::vector<CorpusEntry> out;
  out.push_back(entry("uniform-a", MeasureKind::UniformRandom, 11, 16, 8));
  out.push_back(entry("uniform-b", MeasureKind::UniformRandom, 12, 24, 9));
  out.push_back(entry("uniform-c", MeasureKind::UniformRandom, 13, 32, 10));
  out.push_back(entry("uniform-d", MeasureKind::UniformRandom, 14, 48, 10));
  out.push_back(entry("uniform-e", MeasureKind::UniformRandom, 15, 64, 10));
  out.push_back(entry("lattice-a", MeasureKind::Lattice, 0, 8, 8));
  out.push_back(entry("lattice-b", MeasureKind::Lattice, 0, 16, 9));
  out.push_back(entry("lattice-c", MeasureKind::Lattice, 0, 32, 10));
  out.push_back(entry("cantor-a", MeasureKind::Cantor, 0, 0, 4, 2));
  out.push_back(entry("cantor-b", MeasureKind::Cantor, 0, 0, 6, 3));
  out.push_back(entry("cantor-c", MeasureKind::Cantor, 0, 0, 8, 4));
  out.push_back(entry("spike-a", MeasureKind::AdversarialSpike, 21, 8, 8));
  out.push_back(entry("spike-b", MeasureKind::AdversarialSpike, 22, 16, 9));
  out.push_back(entry("spike-c", MeasureKind::AdversarialSpike, 23, 24, 10));
  out.push_back(entry("uniform-f", MeasureKind::UniformRandom, 16, 40, 9));
  out.push_back(entry("spike-d", MeasureKind::AdversarialSpike, 24, 32, 10));
  return out;
}

std::vector<std::uint64_t> haar_corpus_seeds() {
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 50; ++s) seeds.push_back(1000 + s);
  return seeds;
}

}  // namespace tw

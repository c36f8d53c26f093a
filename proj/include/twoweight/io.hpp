#pragma once

#include <string>

#include <json.hpp>

#include "twoweight/constants.hpp"
#include "twoweight/measure.hpp"
#include "twoweight/sizelemma.hpp"

namespace tw {

inline constexpr int kSpecVersion = 1;

using Json = nlohmann::ordered_json;

Json interval_to_json(const DyadicInterval& interval);       // {"n":..., "j":...}
DyadicInterval interval_from_json(const Json& j);
Json lattice_interval_to_json(const LatticeInterval& interval);

/// Measure file format: {"K": int, "atoms": [{"k": int, "mass": float}]}.
Json measure_to_json(const AtomicMeasure& nu);
AtomicMeasure measure_from_json(const Json& j);

/// Pair file: {"spec_version": .., "sigma": <measure>, "w": <measure>}.
Json pair_to_json(const MeasurePair& pair);
MeasurePair pair_from_json(const Json& j, GridConfig grid = {});
MeasurePair load_pair(const std::string& path, GridConfig grid = {});
void save_pair(const MeasurePair& pair, const std::string& path);

Json constants_to_json(const ConstantsReport& report);
Json energy_to_json(const EnergyStopping& energy, const AtomicMeasure& sigma);
Json decomposition_to_json(const DecompositionRun& run);
Json node_to_json(const DecompositionNode& node);

/// DOT rendering of the selected interval forest.
std::string l_collection_dot(const LCollection& l);

/// CSV of per-atom field values: columns (atom_position, value), 17
/// significant digits.
std::string field_csv(const AtomicMeasure& nu, const std::vector<double>& values);

std::string format_double(double x);  // 17 significant digits

/// Write-to-temp-then-rename, so partially written reports never appear.
void atomic_write(const std::string& path, const std::string& content);

Json load_json(const std::string& path);

}  // namespace tw

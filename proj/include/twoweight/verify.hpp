#pragma once

#include <string>
#include <vector>

namespace tw {

struct CheckResult {
  std::string id;
  bool pass = false;
  double measured = 0.0;  // worst measured quantity, when meaningful
  double cap = 0.0;       // committed cap or tolerance it is held against
  std::string detail;
  double seconds = 0.0;
};

struct VerifyRun {
  std::vector<CheckResult> results;
  double decomp_setup_seconds = 0.0;     // shared decomposition-corpus build
  double constants_setup_seconds = 0.0;  // shared constants-corpus build
};

/// Runs every named invariant check over the built-in seeded corpus.
/// Check ids are stable; the CLI and the acceptance suite consume them.
VerifyRun run_verify_timed();
std::vector<CheckResult> run_verify();

/// Subset of checks by id prefix (e.g. "haar." or a full id).
std::vector<CheckResult> run_verify(const std::vector<std::string>& prefixes);

}  // namespace tw

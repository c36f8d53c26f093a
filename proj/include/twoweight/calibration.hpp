#pragma once

namespace tw::calibration {

// Committed caps for the measured-constant checks. Values were fixed by the
// seeded calibration run over the shipped corpus (tools/calibrate) with a
// safety margin, and regressions against them fail the suite.

// Energy stopping threshold knob: smallest power of two for which the
// sigma-mass bound sigma(union F) <= sigma(I0)/10 holds across the corpus.
inline constexpr double kDefaultC0 = 1.0;

// Comparability ratio cap: norm / h_const over the corpus.
inline constexpr double kRatioCap = 1.5;

// Disjoint-holes lemma: form norm against eta.
inline constexpr double kCapHoles = 4.0;
// Enclosing-holes lemma: form norm against eta.
inline constexpr double kCapHolesEnclosing = 4.0;
// Fixed-ratio lemma: form norm against size.
inline constexpr double kCapEqual = 4.0;
// Decay lemma: norm of Q_{L,t} against rho^(-t/2) tau.
inline constexpr double kCapYDecay = 4.0;
// Monotonicity principle ratio.
inline constexpr double kCapMono = 1.25;
// Carleson sum of stopping data against the squared norm (asserted cap).
inline constexpr double kCapQuasi = 20.0;
// Node constant of the Size Lemma estimate.
inline constexpr double kCapNodeConstant = 4.0;
// eta against size (holes-lemma side estimate), measured where size > 0.
inline constexpr double kCapEtaVsSize = 4.0;
// Step-function bound |phi_J| <= C alpha_f(pi_F J).
inline constexpr double kCapPhi = 8.0;

}  // namespace tw::calibration

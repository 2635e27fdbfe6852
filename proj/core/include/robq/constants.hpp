#pragma once

// Constants hidden inside O(.) bounds. Each was picked by a one-time
// Monte-Carlo calibration and is frozen here; the tests that motivated
// them live next to the module they parameterize.

namespace robq::constants {

// Gaussian JL: m = ceil(kGaussianJl / eps^2). 64 rows at eps = 0.25 keep a
// fixed unit vector inside (1 +- eps) for 99.3% of fresh maps.
inline constexpr double kGaussianJl = 4.0;

// Fast JL: m = ceil(kFastJl * ln(d_pad) / eps^2).
inline constexpr double kFastJl = 1.0;

// Leverage sampling: p_i = min(1, eps^-2 * u_i * kLeverage * ln max(d, 2)).
inline constexpr double kLeverage = 2.0;

// Robust framework: L = ln max(2, nQ), k = max(kSubsampleFloor, ceil(kSubsample L)),
// r = max(2k, ceil(kReplicas sqrt(Q) L^2)).
inline constexpr double kReplicas = 40.0;
inline constexpr double kSubsample = 12.0;
inline constexpr double kSubsampleFloor = 48.0;
inline constexpr double kMedianEpsilon = 1.0;

// Dynamic regression.
inline constexpr double kRegressionJlRows = 1.5;    // rows(G) = ceil(c eps^-2 ln n)
inline constexpr double kEpochLength = 1.0 / 256.0;  // T = ceil(c nnz(A) / (eps^2 K))
inline constexpr double kEpochInstances = 2.0;     // Gamma = ceil(c sqrt(T) ln(nT))
inline constexpr double kEpochPrivacy = 80.0;      // eps_round = min(1, c / (sqrt(T) ln(nT)))

// SRHT distance estimation.
inline constexpr double kSrhtBlocks = 1.0;      // m = ceil(c eps^-2 ln(2dn/eps))
inline constexpr double kSrhtReplicas = 0.1;    // r = ceil(c sqrt(Q) ln^3(nd))
inline constexpr double kSrhtCoordinates = 1.0; // k = ceil(c eps^-2 ln(2/eps) ln(2nd))
inline constexpr double kSrhtVotes = 10.0;      // l = ceil(c ln(nd))

// KDE sampling estimator: s = ceil(c ln(1/delta) / (tau eps^2)).
inline constexpr double kKdeSamples = 1.0;

}  // namespace robq::constants

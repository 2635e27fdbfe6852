#pragma once

#include "robq/types.hpp"

#include <span>
#include <vector>

namespace robq {

inline constexpr double kInvPhi34 = 0.6744897501960817;  // Phi^-1(3/4)

struct TruncationParams {
  double r_trunc;
  double eps;

  // r = 4 sqrt(ln(1/eps)), the smallest level the norm estimate tolerates.
  static TruncationParams for_eps(double eps);
};

double psi_r(double a, double r_trunc);

// Truncated-mean norm estimate from k coordinates of h(x). Two passes: the
// scale is median|c| / Phi^-1(3/4), then coordinates are clamped at
// r_trunc * scale and the mean is multiplied by sqrt(pi/2).
double ret_norm(std::span<const double> coords, const TruncationParams& params);
double ret_norm(const Vector& coords, const TruncationParams& params);

// The ceil(alpha * n)-th smallest element, 0 < alpha <= 1.
double quantile(std::span<const double> values, double alpha);

// Lower median: element of rank ceil(n/2).
double lower_median(std::span<const double> values);

}  // namespace robq

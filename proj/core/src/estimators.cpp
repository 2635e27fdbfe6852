#include "robq/estimators.hpp"

#include "robq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace robq {

TruncationParams TruncationParams::for_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("truncation eps must lie in (0, 1)");
  return {4.0 * std::sqrt(std::log(1.0 / eps)), eps};
}

double psi_r(double a, double r_trunc) {
  if (!(r_trunc > 0.0)) throw ParameterError("psi_r needs r_trunc > 0");
  return std::min(std::abs(a), r_trunc);
}

double ret_norm(std::span<const double> coords, const TruncationParams& params) {
  if (coords.empty()) throw DegenerateInputError("ret_norm: empty coordinate sample");
  if (!(params.r_trunc > 0.0)) throw ParameterError("ret_norm needs r_trunc > 0");

  std::vector<double> mags(coords.size());
  std::transform(coords.begin(), coords.end(), mags.begin(), [](double c) { return std::abs(c); });
  std::vector<double> sorted = mags;
  const double med = quantile(sorted, 0.5);
  const double scale = med / kInvPhi34;
  if (scale == 0.0) {
    // Over half the sample is zero. Fall back to no truncation so a
    // constant sample still reports its own magnitude.
    double sum = 0.0;
    for (double m : mags) sum += m;
    return std::sqrt(std::numbers::pi / 2.0) * sum / static_cast<double>(mags.size());
  }
  const double level = params.r_trunc * scale;
  double sum = 0.0;
  for (double m : mags) sum += std::min(m, level);
  return std::sqrt(std::numbers::pi / 2.0) * sum / static_cast<double>(mags.size());
}

double ret_norm(const Vector& coords, const TruncationParams& params) {
  return ret_norm(std::span<const double>(coords.data(), static_cast<std::size_t>(coords.size())),
                  params);
}

double quantile(std::span<const double> values, double alpha) {
  if (values.empty()) throw DegenerateInputError("quantile of an empty multiset");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("quantile alpha must lie in (0, 1]");
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::vector<double> copy(values.begin(), values.end());
  std::nth_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(rank - 1), copy.end());
  return copy[rank - 1];
}

double lower_median(std::span<const double> values) { return quantile(values, 0.5); }

}  // namespace robq

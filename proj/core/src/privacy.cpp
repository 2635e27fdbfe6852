#include "robq/privacy.hpp"

#include "robq/constants.hpp"
#include "robq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace robq {

OutputGrid::OutputGrid(double lo, double hi, double ratio) : lo_(lo), hi_(hi), ratio_(ratio) {
  if (!(lo > 0.0) || !std::isfinite(lo)) throw ParameterError("OutputGrid: lo must be positive");
  if (!(hi > lo) || !std::isfinite(hi)) throw ParameterError("OutputGrid: need lo < hi");
  if (!(ratio > 1.0) || !std::isfinite(ratio)) throw ParameterError("OutputGrid: ratio must exceed 1");
  log_ratio_ = std::log(ratio);
  const auto J = static_cast<std::size_t>(std::ceil(std::log(hi / lo) / log_ratio_));
  if (J > 50'000'000) throw CapacityError("OutputGrid: more than 5e7 points");
  points_.reserve(J + 2);
  points_.push_back(0.0);
  for (std::size_t j = 0; j <= J; ++j) points_.push_back(lo * std::pow(ratio, static_cast<double>(j)));
}

std::size_t OutputGrid::snap(double value) const {
  if (!(value >= lo_)) return 0;  // also catches NaN
  const double pos = std::log(value / lo_) / log_ratio_;
  const auto top = static_cast<double>(points_.size() - 2);
  return 1 + static_cast<std::size_t>(std::min(std::round(pos), top));
}

namespace {

void check_median_args(std::span<const double> values, double epsilon) {
  if (values.empty()) throw DegenerateInputError("private_median: empty input");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ParameterError("private_median: epsilon must be positive");
}

// Unnormalized weights exp(eps (u - u_max) / 2) per grid point.
std::vector<double> median_weights(std::span<const double> values, const OutputGrid& grid,
                                   double epsilon) {
  check_median_args(values, epsilon);
  const std::size_t g = grid.size();
  std::vector<std::size_t> hits(g, 0);
  for (double v : values) ++hits[grid.snap(v)];

  const auto n = static_cast<long long>(values.size());
  std::vector<double> utility(g);
  long long below = 0;
  long long best = std::numeric_limits<long long>::min();
  for (std::size_t i = 0; i < g; ++i) {
    const long long at = static_cast<long long>(hits[i]);
    const long long above = n - below - at;
    const long long u = -std::max(below, above);
    utility[i] = static_cast<double>(u);
    best = std::max(best, u);
    below += at;
  }
  std::vector<double> w(g);
  for (std::size_t i = 0; i < g; ++i) {
    w[i] = std::exp(epsilon * (utility[i] - static_cast<double>(best)) / 2.0);
  }
  return w;
}

}  // namespace

std::size_t private_median_index(std::span<const double> values, const OutputGrid& grid,
                                 double epsilon, Rng& rng) {
  const auto w = median_weights(values, grid, epsilon);
  double total = 0.0;
  for (double x : w) total += x;
  double target = rng.uniform() * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (target < w[i]) return i;
    target -= w[i];
  }
  // Rounding left a sliver past the end; return the last positive weight.
  for (std::size_t i = w.size(); i-- > 0;) {
    if (w[i] > 0.0) return i;
  }
  return 0;
}

double private_median(std::span<const double> values, const OutputGrid& grid, double epsilon,
                      Rng& rng) {
  return grid.point(private_median_index(values, grid, epsilon, rng));
}

std::vector<double> private_median_distribution(std::span<const double> values,
                                                const OutputGrid& grid, double epsilon) {
  auto w = median_weights(values, grid, epsilon);
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return w;
}

PrivacyParams advanced_composition(std::size_t k, double eps, double delta, double delta_prime) {
  if (!(eps > 0.0 && eps <= 1.0)) throw ParameterError("advanced_composition: eps must lie in (0, 1]");
  if (!(delta_prime > 0.0 && delta_prime <= 1.0)) {
    throw ParameterError("advanced_composition: delta' must lie in (0, 1]");
  }
  if (!(delta >= 0.0 && delta <= 1.0)) throw ParameterError("advanced_composition: delta must lie in [0, 1]");
  const auto kd = static_cast<double>(k);
  PrivacyParams out;
  out.epsilon = std::sqrt(2.0 * kd * std::log(1.0 / delta_prime)) * eps + 2.0 * kd * eps * eps;
  out.delta = kd * delta + delta_prime;
  return out;
}

PrivacyParams subsampling_amplification(double eps, double delta, std::size_t k, std::size_t n) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw ParameterError("subsampling_amplification: eps must lie in [0, 1]");
  if (!(delta >= 0.0 && delta <= 1.0)) throw ParameterError("subsampling_amplification: delta must lie in [0, 1]");
  if (n == 0) throw ParameterError("subsampling_amplification: n must be positive");
  if (2 * k > n) throw ParameterError("subsampling_amplification: requires k <= n/2");
  const auto kd = static_cast<double>(k);
  const auto nd = static_cast<double>(n);
  PrivacyParams out;
  out.epsilon = 6.0 * eps * kd / nd;
  out.delta = std::exp(out.epsilon) * 4.0 * kd * delta / nd;
  return out;
}

namespace {

void fill_accounting(FrameworkParams& p) {
  if (2 * p.k > p.r) {
    p.per_query = {std::numeric_limits<double>::infinity(), 0.0};
    p.total = p.per_query;
    return;
  }
  p.per_query = subsampling_amplification(p.eps_med, 0.0, p.k, p.r);
  const auto Qd = static_cast<double>(p.Q);
  PrivacyParams basic{Qd * p.per_query.epsilon, Qd * p.per_query.delta};
  p.total = basic;
  const double delta_prime = 1.0 / (static_cast<double>(p.n) * Qd);
  if (p.per_query.epsilon > 0.0 && p.per_query.epsilon <= 1.0 && delta_prime <= 1.0) {
    const auto adv = advanced_composition(p.Q, p.per_query.epsilon, p.per_query.delta, delta_prime);
    if (adv.epsilon < basic.epsilon) p.total = adv;
  }
}

}  // namespace

FrameworkParams framework_params(std::size_t Q, std::size_t n) {
  if (Q == 0) throw ParameterError("framework_params: Q must be at least 1");
  if (n == 0) throw ParameterError("framework_params: n must be at least 1");
  const double L = std::log(std::max(2.0, static_cast<double>(n) * static_cast<double>(Q)));
  FrameworkParams p;
  p.Q = Q;
  p.n = n;
  p.eps_med = constants::kMedianEpsilon;
  p.k = static_cast<std::size_t>(std::max(constants::kSubsampleFloor, std::ceil(constants::kSubsample * L)));
  const double r = std::ceil(constants::kReplicas * std::sqrt(static_cast<double>(Q)) * L * L);
  p.r = std::max(2 * p.k, static_cast<std::size_t>(r));
  fill_accounting(p);
  return p;
}

FrameworkParams framework_params(std::size_t r, std::size_t k, std::size_t Q, std::size_t n) {
  if (r == 0 || k == 0) throw ParameterError("framework_params: r and k must be positive");
  if (Q == 0 || n == 0) throw ParameterError("framework_params: Q and n must be positive");
  FrameworkParams p;
  p.r = r;
  p.k = k;
  p.Q = Q;
  p.n = n;
  p.eps_med = constants::kMedianEpsilon;
  fill_accounting(p);
  return p;
}

}  // namespace robq

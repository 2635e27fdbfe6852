#pragma once

#include "robq/rng.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace robq {

struct PrivacyParams {
  double epsilon = 0.0;
  double delta = 0.0;
};

// {0} followed by lo * ratio^j for j = 0..J, J = ceil(log(hi/lo) / log(ratio)).
class OutputGrid {
 public:
  OutputGrid(double lo, double hi, double ratio);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double ratio() const { return ratio_; }
  std::size_t size() const { return points_.size(); }
  double point(std::size_t i) const { return points_[i]; }
  const std::vector<double>& points() const { return points_; }

  // Nearest grid point in log scale; values below lo go to 0, values above
  // the top point go to the top point.
  std::size_t snap(double value) const;

 private:
  double lo_;
  double hi_;
  double ratio_;
  double log_ratio_;
  std::vector<double> points_;
};

// Exponential mechanism over the grid. Values are snapped to grid points;
// utility u(g) = -max(#{v < g}, #{v > g}), sampled with probability
// proportional to exp(epsilon * u / 2).
double private_median(std::span<const double> values, const OutputGrid& grid, double epsilon,
                      Rng& rng);
std::size_t private_median_index(std::span<const double> values, const OutputGrid& grid,
                                 double epsilon, Rng& rng);
std::vector<double> private_median_distribution(std::span<const double> values,
                                                const OutputGrid& grid, double epsilon);

PrivacyParams advanced_composition(std::size_t k, double eps, double delta, double delta_prime);
PrivacyParams subsampling_amplification(double eps, double delta, std::size_t k, std::size_t n);

struct FrameworkParams {
  std::size_t r = 0;
  std::size_t k = 0;
  double eps_med = 1.0;
  std::size_t Q = 0;
  std::size_t n = 0;
  // Budget bookkeeping for the Q-query transcript.
  PrivacyParams per_query;
  PrivacyParams total;
};

FrameworkParams framework_params(std::size_t Q, std::size_t n);
// Explicit r and k (used by experiments that fix them); accounting is
// filled in the same way when k <= r/2, otherwise left at infinity.
FrameworkParams framework_params(std::size_t r, std::size_t k, std::size_t Q, std::size_t n);

}  // namespace robq

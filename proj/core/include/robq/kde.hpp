#pragma once

#include "robq/privacy.hpp"
#include "robq/robust.hpp"
#include "robq/types.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace robq {

enum class KernelKind { Exp, Rational };

struct Kernel {
  KernelKind kind = KernelKind::Exp;
  double C = 1.0;

  Kernel() = default;
  Kernel(KernelKind k, double c);

  // exp: C e^{-t}; rational: C / (C + t), t = ||x - y||.
  double of_distance(double t) const;
  double operator()(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) const;
  double self_value() const;
  // exp: |d/dt C e^{-t}| <= C. rational: |d/dt C/(C+t)| = C/(C+t)^2 <= 1/C.
  double lipschitz() const;
  // Smallest rho with k(t) <= tau/3 for all t >= rho.
  // exp: C e^{-rho} = tau/3 gives rho = ln(3C/tau).
  // rational: C/(C+rho) = tau/3 gives rho = C(3/tau - 1).
  double rho(double tau) const;
  std::string name() const;
};

Kernel parse_kernel(std::string_view name, double scale);

double kde_exact(const Matrix& X, const Vector& q, const Kernel& kernel);

struct KdeQueryResult {
  double value = 0.0;
  bool promise_met = false;
};

std::size_t kde_sample_size(double eps, double tau, double delta);

// Mean kernel value over s points drawn uniformly with replacement.
class KdeSampleEstimator {
 public:
  KdeSampleEstimator(std::shared_ptr<const Matrix> X, double eps, double tau, double delta,
                     const Kernel& kernel, std::uint64_t seed);
  KdeSampleEstimator(const Matrix& X, double eps, double tau, double delta, const Kernel& kernel,
                     std::uint64_t seed);

  KdeQueryResult query(const Vector& q) const;
  double answer(const Vector& q) const { return value(q); }
  double value(const Vector& q) const;

  std::size_t sample_size() const { return sample_.size(); }
  const std::vector<std::uint32_t>& sample() const { return sample_; }
  const Kernel& kernel() const { return kernel_; }
  double eps() const { return eps_; }
  double tau() const { return tau_; }
  double delta() const { return delta_; }
  const Matrix& points() const { return *X_; }

 private:
  std::shared_ptr<const Matrix> X_;
  std::vector<std::uint32_t> sample_;
  Kernel kernel_;
  double eps_;
  double tau_;
  double delta_;
};

// Replicas use delta = 1/4. Grid spans [tau (1 - eps) / 1000, 2 k(x, x)].
OutputGrid default_kde_grid(const Kernel& kernel, double eps, double tau);

RobustWrapper<KdeSampleEstimator, Vector> robust_kde_build(const Matrix& X, std::size_t Q, double eps,
                                                           double tau, const Kernel& kernel,
                                                           std::uint64_t seed);
RobustWrapper<KdeSampleEstimator, Vector> robust_kde_build(const Matrix& X, const FrameworkParams& params,
                                                           double eps, double tau, const Kernel& kernel,
                                                           std::uint64_t seed);

// Answers any number of adaptive queries: the base estimator is made
// accurate on a fine net of the ball that can hold promise-meeting queries,
// and Lipschitzness carries accuracy to every point.
class NetWrapper {
 public:
  // Delta <= 0: use the radius of X about its centroid. rho <= 0: use kernel.rho(tau).
  NetWrapper(const Matrix& X, double eps, double tau, const Kernel& kernel, double Delta, double rho,
             std::uint64_t seed);

  KdeQueryResult query(const Vector& q) const;

  double net_radius() const { return net_radius_; }
  double separation() const { return separation_; }
  double ball_radius() const { return Delta_ + rho_; }
  double Delta() const { return Delta_; }
  double rho() const { return rho_; }
  double tau() const { return tau_; }
  double eps() const { return eps_; }
  double lipschitz() const { return kernel_.lipschitz(); }
  const Vector& center() const { return center_; }
  std::size_t net_size() const { return static_cast<std::size_t>(net_.rows()); }
  const Matrix& net() const { return net_; }
  // Packing bound (1 + 2R / separation)^d.
  double size_bound() const;
  // Distance from p to the closest net point.
  double covering_distance(const Vector& p) const;
  const KdeSampleEstimator& base() const { return *base_; }

  static constexpr double kMaxNetSize = 1e7;

 private:
  using CellKey = std::vector<long long>;
  struct CellHash {
    std::size_t operator()(const CellKey& key) const;
  };

  CellKey cell_of(const Vector& p) const;
  void build_net();

  Kernel kernel_;
  double eps_;
  double tau_;
  double Delta_;
  double rho_;
  double net_radius_;
  double separation_;
  Vector center_;
  Matrix net_;
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> cells_;
  std::unique_ptr<KdeSampleEstimator> base_;
};

}  // namespace robq

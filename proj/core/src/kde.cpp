#include "robq/kde.hpp"

#include "robq/constants.hpp"
#include "robq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace robq {

Kernel::Kernel(KernelKind k, double c) : kind(k), C(c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ParameterError("kernel scale C must be positive");
}

double Kernel::of_distance(double t) const {
  return kind == KernelKind::Exp ? C * std::exp(-t) : C / (C + t);
}

double Kernel::operator()(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) const {
  return of_distance((x - y).norm());
}

double Kernel::self_value() const { return kind == KernelKind::Exp ? C : 1.0; }

double Kernel::lipschitz() const { return kind == KernelKind::Exp ? C : 1.0 / C; }

double Kernel::rho(double tau) const {
  if (!(tau > 0.0)) throw ParameterError("kernel rho needs tau > 0");
  const double r = kind == KernelKind::Exp ? std::log(3.0 * C / tau) : C * (3.0 / tau - 1.0);
  return std::max(0.0, r);
}

std::string Kernel::name() const { return kind == KernelKind::Exp ? "exp" : "rational"; }

Kernel parse_kernel(std::string_view name, double scale) {
  if (name == "exp") return Kernel(KernelKind::Exp, scale);
  if (name == "rational") return Kernel(KernelKind::Rational, scale);
  throw ParameterError("unknown kernel '" + std::string(name) + "'; supported kernels: exp|rational");
}

double kde_exact(const Matrix& X, const Vector& q, const Kernel& kernel) {
  if (X.rows() == 0) throw DegenerateInputError("kde_exact: empty dataset");
  require_length(q, static_cast<std::size_t>(X.cols()), "kde_exact");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) sum += kernel(X.row(i).transpose(), q);
  return sum / static_cast<double>(X.rows());
}

std::size_t kde_sample_size(double eps, double tau, double delta) {
  if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("KDE eps must lie in (0, 1)");
  if (!(tau > 0.0)) throw ParameterError("KDE tau must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("KDE delta must lie in (0, 1)");
  const double s = std::ceil(constants::kKdeSamples * std::log(1.0 / delta) / (tau * eps * eps));
  if (s > 1e9) throw CapacityError("KDE sample size exceeds 1e9");
  return std::max<std::size_t>(1, static_cast<std::size_t>(s));
}

KdeSampleEstimator::KdeSampleEstimator(const Matrix& X, double eps, double tau, double delta,
                                       const Kernel& kernel, std::uint64_t seed)
    : KdeSampleEstimator(std::make_shared<const Matrix>(X), eps, tau, delta, kernel, seed) {}

KdeSampleEstimator::KdeSampleEstimator(std::shared_ptr<const Matrix> X, double eps, double tau,
                                       double delta, const Kernel& kernel, std::uint64_t seed)
    : X_(std::move(X)), kernel_(kernel), eps_(eps), tau_(tau), delta_(delta) {
  if (!X_ || X_->rows() == 0) throw DegenerateInputError("KDE estimator needs at least one point");
  if (static_cast<std::size_t>(X_->rows()) > std::numeric_limits<std::uint32_t>::max()) {
    throw CapacityError("KDE estimator supports at most 2^32 - 1 points");
  }
  if (tau > kernel.self_value()) throw ParameterError("KDE tau must not exceed k(x, x)");
  const std::size_t s = kde_sample_size(eps, tau, delta);
  Rng rng(seed);
  sample_.resize(s);
  for (auto& idx : sample_) idx = static_cast<std::uint32_t>(rng.uniform_index(static_cast<std::size_t>(X_->rows())));
}

double KdeSampleEstimator::value(const Vector& q) const {
  require_length(q, static_cast<std::size_t>(X_->cols()), "KDE query");
  double sum = 0.0;
  for (std::uint32_t idx : sample_) sum += kernel_(X_->row(idx).transpose(), q);
  return sum / static_cast<double>(sample_.size());
}

KdeQueryResult KdeSampleEstimator::query(const Vector& q) const {
  const double v = value(q);
  return {v, v >= tau_ * (1.0 - eps_)};
}

OutputGrid default_kde_grid(const Kernel& kernel, double eps, double tau) {
  return OutputGrid(1e-3 * tau * (1.0 - eps), 2.0 * kernel.self_value(), 1.01);
}

RobustWrapper<KdeSampleEstimator, Vector> robust_kde_build(const Matrix& X, std::size_t Q, double eps,
                                                           double tau, const Kernel& kernel,
                                                           std::uint64_t seed) {
  return robust_kde_build(X, framework_params(Q, static_cast<std::size_t>(X.rows())), eps, tau, kernel,
                          seed);
}

RobustWrapper<KdeSampleEstimator, Vector> robust_kde_build(const Matrix& X, const FrameworkParams& params,
                                                           double eps, double tau, const Kernel& kernel,
                                                           std::uint64_t seed) {
  require_finite(X, "robust KDE points");
  auto shared = std::make_shared<const Matrix>(X);
  auto factory = [&](std::uint64_t s) { return KdeSampleEstimator(shared, eps, tau, 0.25, kernel, s); };
  return RobustWrapper<KdeSampleEstimator, Vector>(factory, params, default_kde_grid(kernel, eps, tau), seed);
}

std::size_t NetWrapper::CellHash::operator()(const CellKey& key) const {
  std::uint64_t h = 0x9E3779B97F4A7C15ull;
  for (long long v : key) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
  return static_cast<std::size_t>(h);
}

NetWrapper::NetWrapper(const Matrix& X, double eps, double tau, const Kernel& kernel, double Delta,
                       double rho, std::uint64_t seed)
    : kernel_(kernel), eps_(eps), tau_(tau) {
  if (X.rows() == 0) throw DegenerateInputError("NetWrapper needs at least one point");
  require_finite(X, "NetWrapper points");
  if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("NetWrapper eps must lie in (0, 1)");
  if (!(tau > 0.0 && tau <= kernel.self_value())) throw ParameterError("NetWrapper tau must lie in (0, k(x, x)]");

  center_ = X.colwise().mean().transpose();
  const double spread = (X.rowwise() - center_.transpose()).rowwise().norm().maxCoeff();
  Delta_ = Delta > 0.0 ? Delta : spread;
  if (Delta_ < spread * (1.0 - 1e-12)) throw ParameterError("NetWrapper Delta is smaller than the data radius");
  rho_ = rho > 0.0 ? rho : kernel.rho(tau);
  if (kernel.of_distance(rho_) > tau / 3.0 * (1.0 + 1e-12)) {
    throw ParameterError("NetWrapper rho too small: k(rho) must be at most tau/3");
  }
  net_radius_ = eps * tau / (3.0 * kernel.lipschitz());
  separation_ = 0.75 * net_radius_;

  const double bound = size_bound();
  if (!(bound <= kMaxNetSize)) {
    throw CapacityError("net size bound " + std::to_string(bound) + " exceeds the cap of 1e7 points");
  }
  build_net();
  const double delta = 1.0 / (100.0 * static_cast<double>(net_size()));
  base_ = std::make_unique<KdeSampleEstimator>(X, eps / 3.0, tau / 2.0, delta, kernel, seed);
}

double NetWrapper::size_bound() const {
  const double d = static_cast<double>(center_.size());
  return std::pow(1.0 + 2.0 * ball_radius() / separation_, d);
}

NetWrapper::CellKey NetWrapper::cell_of(const Vector& p) const {
  CellKey key(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    key[static_cast<std::size_t>(i)] = static_cast<long long>(std::floor((p[i] - center_[i]) / separation_));
  }
  return key;
}

void NetWrapper::build_net() {
  // Lattice candidates with half-diagonal net_radius/4, so every ball point
  // is within net_radius/4 of a candidate and every candidate within
  // separation of a net point: covering radius net_radius.
  const auto d = static_cast<std::size_t>(center_.size());
  const double h = net_radius_ / (2.0 * std::sqrt(static_cast<double>(d)));
  const double R = ball_radius();
  const double reach = R + h * std::sqrt(static_cast<double>(d));
  const auto steps = static_cast<long long>(std::ceil(reach / h));
  const double per_axis = static_cast<double>(2 * steps + 1);
  if (std::pow(per_axis, static_cast<double>(d)) > 5e8) {
    throw CapacityError("net candidate lattice exceeds 5e8 points");
  }

  std::vector<Vector> chosen;
  std::vector<long long> idx(d, -steps);
  Vector p(static_cast<Eigen::Index>(d));
  const double sep2 = separation_ * separation_;
  for (;;) {
    for (std::size_t i = 0; i < d; ++i) p[static_cast<Eigen::Index>(i)] = center_[static_cast<Eigen::Index>(i)] + h * static_cast<double>(idx[i]);
    if ((p - center_).norm() <= reach) {
      const CellKey key = cell_of(p);
      bool free = true;
      CellKey probe(d);
      std::vector<int> off(d, -1);
      for (bool more = true; more && free;) {
        for (std::size_t i = 0; i < d; ++i) probe[i] = key[i] + off[i];
        if (auto it = cells_.find(probe); it != cells_.end()) {
          for (std::size_t j : it->second) {
            if ((chosen[j] - p).squaredNorm() < sep2) {
              free = false;
              break;
            }
          }
        }
        more = false;
        for (std::size_t i = 0; i < d; ++i) {
          if (++off[i] <= 1) {
            more = true;
            break;
          }
          off[i] = -1;
        }
      }
      if (free) {
        if (static_cast<double>(chosen.size()) + 1 > kMaxNetSize) {
          throw CapacityError("net exceeds the cap of 1e7 points");
        }
        cells_[key].push_back(chosen.size());
        chosen.push_back(p);
      }
    }
    std::size_t axis = 0;
    while (axis < d && ++idx[axis] > steps) {
      idx[axis] = -steps;
      ++axis;
    }
    if (axis == d) break;
  }
  net_.resize(static_cast<Eigen::Index>(chosen.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < chosen.size(); ++i) net_.row(static_cast<Eigen::Index>(i)) = chosen[i].transpose();
}

double NetWrapper::covering_distance(const Vector& p) const {
  require_length(p, static_cast<std::size_t>(center_.size()), "covering_distance");
  const auto d = static_cast<std::size_t>(p.size());
  const CellKey key = cell_of(p);
  const int span = static_cast<int>(std::ceil(net_radius_ / separation_)) + 1;
  double best = std::numeric_limits<double>::infinity();
  CellKey probe(d);
  std::vector<int> off(d, -span);
  for (bool more = true; more;) {
    for (std::size_t i = 0; i < d; ++i) probe[i] = key[i] + off[i];
    if (auto it = cells_.find(probe); it != cells_.end()) {
      for (std::size_t j : it->second) best = std::min(best, (net_.row(static_cast<Eigen::Index>(j)).transpose() - p).norm());
    }
    more = false;
    for (std::size_t i = 0; i < d; ++i) {
      if (++off[i] <= span) {
        more = true;
        break;
      }
      off[i] = -span;
    }
  }
  if (best > net_radius_) {
    // Nothing close by; fall back to a full scan for an exact answer.
    for (Eigen::Index j = 0; j < net_.rows(); ++j) best = std::min(best, (net_.row(j).transpose() - p).norm());
  }
  return best;
}

KdeQueryResult NetWrapper::query(const Vector& q) const {
  require_finite(q, "NetWrapper query");
  const double v = base_->value(q);
  return {v, v >= tau_ * (1.0 - eps_)};
}

}  // namespace robq

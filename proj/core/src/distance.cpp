#include "robq/distance.hpp"

#include "robq/constants.hpp"
#include "robq/errors.hpp"
#include "robq/estimators.hpp"
#include "robq/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>

namespace robq {

namespace {

void require_points(const Matrix& X) {
  if (X.rows() == 0) throw DegenerateInputError("distance structure needs at least one point");
  if (X.cols() == 0) throw DimensionError("distance structure needs positive dimension");
  require_finite(X, "distance points");
}

std::size_t pick_rows(std::size_t d, double eps, bool gaussian) {
  return gaussian ? gaussian_jl_rows(eps) : fast_jl_rows(d, eps);
}

}  // namespace

OutputGrid default_distance_grid(const Matrix& X) {
  require_points(X);
  const Vector c = X.colwise().mean().transpose();
  const double spread = (X.rowwise() - c.transpose()).rowwise().norm().maxCoeff();
  const double largest = X.rowwise().norm().maxCoeff();
  const double scale = std::max({1.0, 2.0 * spread, largest});
  return OutputGrid(1e-6 * scale, 2.0 * scale, 1.01);
}

JlReplica::JlReplica(const Matrix& X, std::size_t m, bool gaussian, std::uint64_t seed,
                     std::shared_ptr<std::atomic<std::size_t>> counter)
    : counter_(std::move(counter)) {
  const auto d = static_cast<std::size_t>(X.cols());
  if (gaussian) {
    gauss_.emplace(m, d, seed);
  } else {
    fast_.emplace(m, d, seed);
  }
  proj_.resize(X.rows(), static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < X.rows(); ++i) proj_.row(i) = apply(X.row(i).transpose()).transpose();
}

Vector JlReplica::apply(const Vector& v) const {
  if (counter_) counter_->fetch_add(1, std::memory_order_relaxed);
  return fast_ ? fast_->apply(v) : gauss_->apply(v);
}

std::size_t JlReplica::rows() const { return fast_ ? fast_->rows() : gauss_->rows(); }

double JlReplica::answer(const DistanceQuery& q) const {
  const Vector py = apply(q.y);
  return (proj_.row(static_cast<Eigen::Index>(q.i)).transpose() - py).norm();
}

AdeFastJl::AdeFastJl(const Matrix& X, std::size_t Q, double eps, std::uint64_t seed, AdeOptions opts)
    : n_(static_cast<std::size_t>(X.rows())), d_(static_cast<std::size_t>(X.cols())),
      counter_(std::make_shared<std::atomic<std::size_t>>(0)) {
  require_points(X);
  if (Q == 0) throw ParameterError("AdeFastJl: Q must be at least 1");
  m_ = opts.m > 0 ? opts.m : pick_rows(d_, eps, opts.gaussian);
  FrameworkParams params = opts.params ? *opts.params : framework_params(Q, n_);
  params.Q = Q;
  OutputGrid grid = opts.grid ? *opts.grid : default_distance_grid(X);
  auto factory = [&](std::uint64_t s) { return JlReplica(X, m_, opts.gaussian, s, counter_); };
  wrapper_ = std::make_unique<RobustWrapper<JlReplica, DistanceQuery>>(factory, params, std::move(grid), seed);
}

double AdeFastJl::query(const DistanceQuery& q) {
  if (q.i >= n_) throw DimensionError("AdeFastJl::query: point index out of range");
  require_length(q.y, d_, "AdeFastJl::query");
  require_finite(q.y, "AdeFastJl::query");
  return wrapper_->query(q);
}

std::size_t AdeFastJl::storage_reals() const {
  std::size_t total = 0;
  for (const auto& rep : wrapper_->replicas()) total += static_cast<std::size_t>(rep.projections().size());
  return total;
}

std::size_t AdeFastJl::planned_storage_reals(std::size_t n, std::size_t d, std::size_t Q, double eps,
                                             bool gaussian) {
  const auto p = framework_params(Q, n);
  return p.r * n * pick_rows(d, eps, gaussian);
}

AdeSrhtParams ade_srht_params(std::size_t n, std::size_t d, std::size_t Q, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("ade_srht_params: eps must lie in (0, 1)");
  if (n == 0 || d == 0 || Q == 0) throw ParameterError("ade_srht_params: n, d, Q must be positive");
  const double nd = static_cast<double>(n) * static_cast<double>(d);
  const double log_nd = std::log(std::max(2.0, nd));
  const double inv_eps2 = 1.0 / (eps * eps);
  AdeSrhtParams p;
  p.m = static_cast<std::size_t>(std::ceil(constants::kSrhtBlocks * inv_eps2 * std::log(2.0 * nd / eps)));
  p.r = static_cast<std::size_t>(
      std::ceil(constants::kSrhtReplicas * std::sqrt(static_cast<double>(Q)) * log_nd * log_nd * log_nd));
  p.k = static_cast<std::size_t>(
      std::ceil(constants::kSrhtCoordinates * inv_eps2 * std::log(2.0 / eps) * std::log(2.0 * nd)));
  p.l = static_cast<std::size_t>(std::ceil(constants::kSrhtVotes * log_nd));
  p.m = std::max<std::size_t>(p.m, 1);
  p.r = std::max<std::size_t>(p.r, 1);
  p.k = std::max<std::size_t>(p.k, 1);
  p.l = std::max<std::size_t>(p.l, 1);
  p.eps_med = constants::kMedianEpsilon;
  return p;
}

AdeSrht::AdeSrht(const Matrix& X, std::size_t Q, double eps, std::uint64_t seed, AdeSrhtOptions opts)
    : n_(static_cast<std::size_t>(X.rows())), d_(static_cast<std::size_t>(X.cols())), Q_(Q), eps_(eps),
      threads_(std::max<std::size_t>(1, opts.threads)) {
  require_points(X);
  if (Q == 0) throw ParameterError("AdeSrht: Q must be at least 1");
  params_ = opts.params ? *opts.params : ade_srht_params(n_, d_, Q, eps);
  if (params_.m == 0 || params_.r == 0 || params_.k == 0 || params_.l == 0) {
    throw ParameterError("AdeSrht: m, r, k, l must be positive");
  }
  if (Q > d_ && !opts.quiet) {
    std::cerr << "warning: query budget " << Q << " exceeds dimension " << d_
              << "; accuracy is only guaranteed for Q <= d\n";
  }
  grid_ = std::make_unique<OutputGrid>(opts.grid ? *opts.grid : default_distance_grid(X));

  std::uint64_t build_seed = seed;
  stack_ = std::make_unique<SrhtStack>(params_.m, d_, build_seed);
  if (!conditioning_holds(eps, build_seed)) {
    build_seed = splitmix64(seed ^ 0xC0FFEEull);
    stack_ = std::make_unique<SrhtStack>(params_.m, d_, build_seed);
    ++reseeds_;
    if (!conditioning_holds(eps, build_seed)) {
      throw DegenerateInputError("AdeSrht: SRHT failed the norm check on random directions twice");
    }
  }
  build(X, build_seed);
}

bool AdeSrht::conditioning_holds(double eps, std::uint64_t seed) const {
  // With every coordinate of h(z) in hand the truncated mean must already
  // be (1 +- eps)-accurate on unit vectors.
  Rng rng(seed, 3);
  const double r_trunc = TruncationParams::for_eps(std::min(eps, 0.5)).r_trunc;
  for (int trial = 0; trial < 200; ++trial) {
    Vector z(static_cast<Eigen::Index>(d_));
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    z /= z.norm();
    const Vector h = stack_->apply(z);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i) sum += psi_r(h[i], r_trunc);
    const double est = std::sqrt(std::numbers::pi / 2.0) * sum / static_cast<double>(h.size());
    if (std::abs(est - 1.0) > eps) return false;
  }
  return true;
}

void AdeSrht::build(const Matrix& X, std::uint64_t seed) {
  const std::size_t out_dim = stack_->output_dim();
  const std::size_t per_point = params_.r * params_.k;
  indices_.resize(n_ * per_point);
  stored_.resize(n_ * per_point);
  Rng rng(seed, 4);
  for (std::size_t i = 0; i < n_; ++i) {
    const Vector y = stack_->apply(X.row(static_cast<Eigen::Index>(i)).transpose());
    for (std::size_t s = 0; s < per_point; ++s) {
      const auto idx = static_cast<std::uint32_t>(rng.uniform_index(out_dim));
      indices_[i * per_point + s] = idx;
      stored_[i * per_point + s] = y[idx];
    }
  }
  query_seed_ = Rng(seed, 5).next_seed();
}

std::vector<std::uint32_t> AdeSrht::index_set(std::size_t i, std::size_t t) const {
  if (i >= n_ || t >= params_.r) throw DimensionError("AdeSrht::index_set out of range");
  const auto begin = indices_.begin() + static_cast<std::ptrdiff_t>((i * params_.r + t) * params_.k);
  return {begin, begin + static_cast<std::ptrdiff_t>(params_.k)};
}

std::vector<double> AdeSrht::query(const Vector& q) {
  require_length(q, d_, "AdeSrht::query");
  require_finite(q, "AdeSrht::query");
  if (used_ >= Q_) throw BudgetExhaustedError("AdeSrht: query budget exhausted");
  const Vector v = stack_->apply(q);
  const TruncationParams trunc = TruncationParams::for_eps(std::min(eps_, 0.5));
  const std::uint64_t qseed = splitmix64(query_seed_ + used_);
  const std::size_t per_point = params_.r * params_.k;
  std::vector<double> out(n_);
  parallel_for(n_, threads_, [&](std::size_t i) {
    // Per-point stream so results do not depend on the thread count.
    Rng rng(qseed, i);
    std::vector<double> coords(params_.k);
    std::vector<double> votes(params_.l);
    for (std::size_t p = 0; p < params_.l; ++p) {
      const std::size_t t = rng.uniform_index(params_.r);
      const std::size_t base = i * per_point + t * params_.k;
      for (std::size_t c = 0; c < params_.k; ++c) {
        coords[c] = v[indices_[base + c]] - stored_[base + c];
      }
      votes[p] = ret_norm(coords, trunc);
    }
    out[i] = private_median(votes, *grid_, params_.eps_med, rng);
  });
  ++used_;
  return out;
}

std::vector<double> exact_distances(const Matrix& X, const Vector& q) {
  require_length(q, static_cast<std::size_t>(X.cols()), "exact_distances");
  std::vector<double> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[static_cast<std::size_t>(i)] = (X.row(i).transpose() - q).norm();
  return out;
}

}  // namespace robq

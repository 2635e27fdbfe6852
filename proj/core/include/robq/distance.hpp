#pragma once

#include "robq/privacy.hpp"
#include "robq/robust.hpp"
#include "robq/transforms.hpp"
#include "robq/types.hpp"

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace robq {

struct DistanceQuery {
  Vector y;
  std::size_t i = 0;
};

// lo = 1e-6 * scale, hi = 2 * scale with scale = max(1, diameter bound,
// largest point norm).
OutputGrid default_distance_grid(const Matrix& X);

// One replica: a JL map plus the stored projections of every point.
class JlReplica {
 public:
  JlReplica(const Matrix& X, std::size_t m, bool gaussian, std::uint64_t seed,
            std::shared_ptr<std::atomic<std::size_t>> counter);

  // ||Pi x_i - Pi y||, applying the map to y once.
  double answer(const DistanceQuery& q) const;
  Vector apply(const Vector& v) const;
  const Matrix& projections() const { return proj_; }
  std::size_t rows() const;

 private:
  std::optional<FastJlMap> fast_;
  std::optional<GaussianJlMap> gauss_;
  Matrix proj_;  // n x m
  std::shared_ptr<std::atomic<std::size_t>> counter_;
};

struct AdeOptions {
  bool gaussian = false;
  // Replaces framework_params(Q, n) when set.
  std::optional<FrameworkParams> params;
  std::optional<OutputGrid> grid;
  // Target dimension; 0 picks it from eps.
  std::size_t m = 0;
};

class AdeFastJl {
 public:
  AdeFastJl(const Matrix& X, std::size_t Q, double eps, std::uint64_t seed, AdeOptions opts = {});

  double query(const DistanceQuery& q);

  std::size_t n() const { return n_; }
  std::size_t dim() const { return d_; }
  std::size_t map_rows() const { return m_; }
  const FrameworkParams& params() const { return wrapper_->params(); }
  std::size_t queries_used() const { return wrapper_->queries_used(); }
  // Transform applications so far: n r at build, k per query.
  std::size_t applications() const { return counter_->load(); }
  // Stored projection reals: r n m.
  std::size_t storage_reals() const;
  const RobustWrapper<JlReplica, DistanceQuery>& wrapper() const { return *wrapper_; }

  // r n m for the parameters a build would choose, without building.
  static std::size_t planned_storage_reals(std::size_t n, std::size_t d, std::size_t Q, double eps,
                                           bool gaussian = false);

 private:
  std::size_t n_;
  std::size_t d_;
  std::size_t m_;
  std::shared_ptr<std::atomic<std::size_t>> counter_;
  std::unique_ptr<RobustWrapper<JlReplica, DistanceQuery>> wrapper_;
};

struct AdeSrhtParams {
  std::size_t m = 0;  // SRHT blocks
  std::size_t r = 0;  // index-set families per point
  std::size_t k = 0;  // coordinates per family
  std::size_t l = 0;  // families consulted per point per query
  double eps_med = 1.0;
};

AdeSrhtParams ade_srht_params(std::size_t n, std::size_t d, std::size_t Q, double eps);

struct AdeSrhtOptions {
  std::optional<AdeSrhtParams> params;
  std::optional<OutputGrid> grid;
  std::size_t threads = 1;
  bool quiet = false;
};

// All-points distance estimation from one SRHT stack. For each point only
// the coordinates of h(x_i) named by its r index sets are stored.
class AdeSrht {
 public:
  AdeSrht(const Matrix& X, std::size_t Q, double eps, std::uint64_t seed, AdeSrhtOptions opts = {});

  std::vector<double> query(const Vector& q);

  std::size_t n() const { return n_; }
  std::size_t dim() const { return d_; }
  std::size_t queries_used() const { return used_; }
  std::size_t budget() const { return Q_; }
  const AdeSrhtParams& params() const { return params_; }
  const SrhtStack& stack() const { return *stack_; }
  const OutputGrid& grid() const { return *grid_; }
  // Index set t of point i (k coordinates of h(.)).
  std::vector<std::uint32_t> index_set(std::size_t i, std::size_t t) const;
  std::size_t sampled_reals() const { return stored_.size(); }
  std::size_t diagonal_reals() const { return stack_->blocks() * stack_->padded_dim(); }
  std::size_t storage_reals() const { return sampled_reals() + diagonal_reals(); }
  std::size_t reseeds() const { return reseeds_; }

 private:
  bool conditioning_holds(double eps, std::uint64_t seed) const;
  void build(const Matrix& X, std::uint64_t seed);

  std::size_t n_;
  std::size_t d_;
  std::size_t Q_;
  double eps_;
  AdeSrhtParams params_;
  std::unique_ptr<SrhtStack> stack_;
  std::unique_ptr<OutputGrid> grid_;
  std::vector<std::uint32_t> indices_;  // n * r * k
  std::vector<double> stored_;          // matching coordinates of h(x_i)
  std::uint64_t query_seed_ = 0;
  std::size_t used_ = 0;
  std::size_t threads_ = 1;
  std::size_t reseeds_ = 0;
};

// Exact Euclidean distance from q to every row of X.
std::vector<double> exact_distances(const Matrix& X, const Vector& q);

}  // namespace robq

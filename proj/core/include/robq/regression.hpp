#pragma once

#include "robq/leverage.hpp"
#include "robq/privacy.hpp"
#include "robq/rng.hpp"
#include "robq/types.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

namespace robq {

// At most K (index, new value) pairs with distinct indices. Values are
// absolute; the maintainers compute deltas themselves.
struct SparseUpdate {
  std::vector<std::pair<std::size_t, double>> entries;
};

void validate_update(const SparseUpdate& upd, std::size_t n);

// min_x ||Ax - b||^2 via a complete orthogonal decomposition.
double exact_cost_oracle(const Matrix& A, const Vector& b);

// Immutable artifacts shared by every sketch built on the same A.
struct RegressionPrep {
  Matrix A;
  LeverageScores scores;
  std::size_t nnz = 0;
};

std::shared_ptr<const RegressionPrep> regression_prep(const Matrix& A);

enum class SolveMethod { Direct, ConjugateGradient };

std::size_t regression_jl_rows(std::size_t n, double eps);

// Maintains ||M S b - G b||^2 with M = G A (SA)^+ under sparse label updates.
class RegressionSketch {
 public:
  RegressionSketch(std::shared_ptr<const RegressionPrep> prep, const Vector& b1, double eps,
                   std::uint64_t seed, SolveMethod method = SolveMethod::Direct);
  RegressionSketch(const Matrix& A, const Vector& b1, double eps, std::uint64_t seed,
                   SolveMethod method = SolveMethod::Direct);

  double estimate() const { return (msb_ - gb_).squaredNorm(); }
  double update(const SparseUpdate& upd);
  // ||M (S b) - G b||^2 recomputed from b without the maintained vectors.
  double recompute() const;

  const Vector& b() const { return b_; }
  const Matrix& M() const { return M_; }
  const Matrix& G() const { return G_; }
  const RowSamplingMatrix& S() const { return S_; }
  const Vector& Sb() const { return sb_; }
  const Vector& Gb() const { return gb_; }
  const Vector& MSb() const { return msb_; }
  bool rank_deficient() const { return rank_deficient_; }
  std::size_t sample_rank() const { return sample_rank_; }

 private:
  std::shared_ptr<const RegressionPrep> prep_;
  RowSamplingMatrix S_;
  Matrix G_;
  Matrix M_;
  // For each row of A, the positions in S that sample it.
  std::vector<std::vector<std::size_t>> positions_;
  Vector b_;
  Vector sb_;
  Vector gb_;
  Vector msb_;
  bool rank_deficient_ = false;
  std::size_t sample_rank_ = 0;
};

// Deterministic maintainer from a thin SVD A = U Sigma V^T.
// Output ||Sigma V^T x - U^T b||^2 + (||b||^2 - ||U^T b||^2) with x = A^+ b.
// The second term is the part of b outside the column space, which the thin
// factor cannot see.
class ExactMaintainer {
 public:
  ExactMaintainer(const Matrix& A, const Vector& b1);

  double cost() const;
  double update(const SparseUpdate& upd);

  const Vector& x() const { return x_; }
  const Vector& Utb() const { return utb_; }
  std::size_t rank() const { return static_cast<std::size_t>(sigma_.size()); }

 private:
  Matrix U_;
  Vector sigma_;
  Matrix V_;
  Matrix pinv_;  // d x n
  Vector b_;
  Vector x_;
  Vector utb_;
  double b_norm2_ = 0.0;
};

struct EpochParams {
  std::size_t T = 0;
  std::size_t Gamma = 0;
  double eps_round = 1.0;
};

EpochParams epoch_params(std::size_t n, std::size_t nnz, double eps, std::size_t K);

// Gamma independent sketches answered through a private median, all rebuilt
// with fresh seeds every T rounds.
class RobustRegression {
 public:
  RobustRegression(const Matrix& A, const Vector& b1, double eps, std::size_t K, std::uint64_t seed);
  RobustRegression(const Matrix& A, const Vector& b1, double eps, std::size_t K, EpochParams params,
                   std::uint64_t seed);

  double update(const SparseUpdate& upd);

  const EpochParams& params() const { return params_; }
  std::size_t round() const { return round_; }
  std::size_t epoch() const { return epoch_; }
  std::size_t rebuilds() const { return rebuilds_; }
  const Vector& b() const { return b_; }
  const std::vector<RegressionSketch>& instances() const { return instances_; }

 private:
  void rebuild();

  std::shared_ptr<const RegressionPrep> prep_;
  double eps_;
  std::size_t K_;
  EpochParams params_;
  std::uint64_t seed_;
  Vector b_;
  std::vector<RegressionSketch> instances_;
  std::unique_ptr<OutputGrid> grid_;
  Rng rng_;
  std::size_t round_ = 0;
  std::size_t in_epoch_ = 0;
  std::size_t epoch_ = 0;
  std::size_t rebuilds_ = 0;
};

// Convenience driver: one output per update.
std::vector<double> robust_reg_run(const Matrix& A, const Vector& b1, double eps,
                                   const std::vector<SparseUpdate>& updates, std::uint64_t seed);

}  // namespace robq

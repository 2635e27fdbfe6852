#include "robq/regression.hpp"

#include "robq/constants.hpp"
#include "robq/errors.hpp"
#include "robq/robust.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <unordered_set>

namespace robq {

void validate_update(const SparseUpdate& upd, std::size_t n) {
  std::unordered_set<std::size_t> seen;
  for (const auto& [index, value] : upd.entries) {
    if (index >= n) throw DimensionError("update index " + std::to_string(index) + " out of range");
    if (!std::isfinite(value)) throw ParameterError("update value must be finite");
    if (!seen.insert(index).second) throw ParameterError("update indices must be distinct");
  }
}

double exact_cost_oracle(const Matrix& A, const Vector& b) {
  require_finite(A, "exact_cost_oracle A");
  require_length(b, static_cast<std::size_t>(A.rows()), "exact_cost_oracle b");
  require_finite(b, "exact_cost_oracle b");
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
  const Vector x = cod.solve(b);
  return (A * x - b).squaredNorm();
}

std::shared_ptr<const RegressionPrep> regression_prep(const Matrix& A) {
  require_finite(A, "regression A");
  auto prep = std::make_shared<RegressionPrep>();
  prep->A = A;
  prep->scores = compute_leverage_scores(A);
  prep->nnz = static_cast<std::size_t>((A.array() != 0.0).count());
  return prep;
}

std::size_t regression_jl_rows(std::size_t n, double eps) {
  const double log_n = std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
  return static_cast<std::size_t>(std::ceil(constants::kRegressionJlRows * log_n / (eps * eps)));
}

namespace {

void check_eps(double eps) {
  // The accuracy analysis wants eps < 1/4; 1/4 itself is admitted because
  // that is the customary test setting.
  if (!(eps > 0.0 && eps <= 0.25)) throw ParameterError("regression eps must lie in (0, 1/4]");
}

// Rows of (GA) (SA)^+ through CG on (SA)^T (SA) y = (GA)_row^T, then
// M_row = (SA y)^T. Matches the pseudoinverse when SA has full column rank.
Matrix solve_cg(const Matrix& GA, const Matrix& SA) {
  const Matrix N = SA.transpose() * SA;
  Eigen::ConjugateGradient<Matrix, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-14);
  cg.setMaxIterations(std::max<Eigen::Index>(4 * N.rows(), 50));
  cg.compute(N);
  Matrix M(GA.rows(), SA.rows());
  for (Eigen::Index i = 0; i < GA.rows(); ++i) {
    const Vector y = cg.solve(GA.row(i).transpose());
    M.row(i) = (SA * y).transpose();
  }
  return M;
}

}  // namespace

RegressionSketch::RegressionSketch(const Matrix& A, const Vector& b1, double eps, std::uint64_t seed,
                                   SolveMethod method)
    : RegressionSketch(regression_prep(A), b1, eps, seed, method) {}

RegressionSketch::RegressionSketch(std::shared_ptr<const RegressionPrep> prep, const Vector& b1,
                                   double eps, std::uint64_t seed, SolveMethod method)
    : prep_(std::move(prep)) {
  check_eps(eps);
  const Matrix& A = prep_->A;
  const auto n = static_cast<std::size_t>(A.rows());
  require_length(b1, n, "RegressionSketch b1");
  require_finite(b1, "RegressionSketch b1");

  Rng rng(seed);
  S_ = sampling_matrix(prep_->scores, static_cast<std::size_t>(A.cols()), eps / 2.0, rng.next_seed());
  const std::size_t m = regression_jl_rows(n, eps);
  G_.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  const double g_scale = 1.0 / std::sqrt(static_cast<double>(m));
  Rng grng(rng.next_seed());
  for (Eigen::Index j = 0; j < G_.cols(); ++j) {
    for (Eigen::Index i = 0; i < G_.rows(); ++i) G_(i, j) = g_scale * grng.normal();
  }

  const Matrix SA = S_.apply(A);
  const Matrix GA = G_ * A;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(SA);
  sample_rank_ = static_cast<std::size_t>(cod.rank());
  rank_deficient_ = sample_rank_ < static_cast<std::size_t>(std::min(A.rows(), A.cols())) ||
                    SA.rows() < A.cols();
  if (rank_deficient_) {
    std::cerr << "warning: sampled design matrix has rank " << sample_rank_
              << " < " << A.cols() << "; using the pseudoinverse\n";
  }
  if (method == SolveMethod::ConjugateGradient && !rank_deficient_) {
    M_ = solve_cg(GA, SA);
  } else {
    M_ = GA * cod.pseudoInverse();
  }

  positions_.assign(n, {});
  for (std::size_t t = 0; t < S_.size(); ++t) positions_[S_.row_indices[t]].push_back(t);

  b_ = b1;
  sb_ = S_.apply(b_);
  gb_ = G_ * b_;
  msb_ = M_ * sb_;
}

double RegressionSketch::update(const SparseUpdate& upd) {
  validate_update(upd, static_cast<std::size_t>(b_.size()));
  for (const auto& [index, value] : upd.entries) {
    const auto j = static_cast<Eigen::Index>(index);
    const double delta = value - b_[j];
    if (delta == 0.0) continue;
    b_[j] = value;
    gb_.noalias() += delta * G_.col(j);
    for (std::size_t t : positions_[index]) {
      const auto tt = static_cast<Eigen::Index>(t);
      const double ds = S_.scales[t] * delta;
      sb_[tt] += ds;
      msb_.noalias() += ds * M_.col(tt);
    }
  }
  return estimate();
}

double RegressionSketch::recompute() const {
  const Vector sb = S_.apply(b_);
  return (M_ * sb - G_ * b_).squaredNorm();
}

ExactMaintainer::ExactMaintainer(const Matrix& A, const Vector& b1) {
  require_finite(A, "ExactMaintainer A");
  require_length(b1, static_cast<std::size_t>(A.rows()), "ExactMaintainer b1");
  require_finite(b1, "ExactMaintainer b1");
  Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  if (sv.size() > 0 && sv[0] > 0.0) {
    const double tol = sv[0] * static_cast<double>(std::max(A.rows(), A.cols())) *
                       std::numeric_limits<double>::epsilon();
    while (rank < sv.size() && sv[rank] > tol) ++rank;
  }
  U_ = svd.matrixU().leftCols(rank);
  sigma_ = sv.head(rank);
  V_ = svd.matrixV().leftCols(rank);
  pinv_ = V_ * sigma_.cwiseInverse().asDiagonal() * U_.transpose();
  b_ = b1;
  x_ = pinv_ * b_;
  utb_ = U_.transpose() * b_;
  b_norm2_ = b_.squaredNorm();
}

double ExactMaintainer::cost() const {
  const Vector fitted = sigma_.asDiagonal() * (V_.transpose() * x_);
  const double in_span = (fitted - utb_).squaredNorm();
  return in_span + std::max(0.0, b_norm2_ - utb_.squaredNorm());
}

double ExactMaintainer::update(const SparseUpdate& upd) {
  validate_update(upd, static_cast<std::size_t>(b_.size()));
  for (const auto& [index, value] : upd.entries) {
    const auto j = static_cast<Eigen::Index>(index);
    const double old = b_[j];
    const double delta = value - old;
    if (delta == 0.0) continue;
    b_[j] = value;
    b_norm2_ += value * value - old * old;
    x_.noalias() += delta * pinv_.col(j);
    utb_.noalias() += delta * U_.row(j).transpose();
  }
  return cost();
}

EpochParams epoch_params(std::size_t n, std::size_t nnz, double eps, std::size_t K) {
  if (K == 0) throw ParameterError("epoch_params: K must be positive");
  check_eps(eps);
  EpochParams p;
  const double T = std::ceil(constants::kEpochLength * static_cast<double>(nnz) /
                             (eps * eps * static_cast<double>(K)));
  p.T = std::max<std::size_t>(1, static_cast<std::size_t>(T));
  const double Td = static_cast<double>(p.T);
  const double log_nT = std::log(std::max(2.0, static_cast<double>(n) * Td));
  p.Gamma = std::max<std::size_t>(1, static_cast<std::size_t>(
                                         std::ceil(constants::kEpochInstances * std::sqrt(Td) * log_nT)));
  p.eps_round = std::min(1.0, constants::kEpochPrivacy / (std::sqrt(Td) * log_nT));
  return p;
}

RobustRegression::RobustRegression(const Matrix& A, const Vector& b1, double eps, std::size_t K,
                                   std::uint64_t seed)
    : RobustRegression(A, b1, eps, K,
                       epoch_params(static_cast<std::size_t>(A.rows()),
                                    static_cast<std::size_t>((A.array() != 0.0).count()), eps, K),
                       seed) {}

RobustRegression::RobustRegression(const Matrix& A, const Vector& b1, double eps, std::size_t K,
                                   EpochParams params, std::uint64_t seed)
    : prep_(regression_prep(A)), eps_(eps), K_(K), params_(params), seed_(seed), b_(b1),
      rng_(seed, 2) {
  check_eps(eps);
  if (params_.T == 0 || params_.Gamma == 0) throw ParameterError("RobustRegression: T and Gamma must be positive");
  if (!(params_.eps_round > 0.0)) throw ParameterError("RobustRegression: eps_round must be positive");
  require_length(b1, static_cast<std::size_t>(A.rows()), "RobustRegression b1");
  rebuild();
}

void RobustRegression::rebuild() {
  instances_.clear();
  instances_.reserve(params_.Gamma);
  const std::uint64_t epoch_seed = splitmix64(seed_ + 0x5EEDull * (epoch_ + 1));
  for (std::size_t i = 0; i < params_.Gamma; ++i) {
    instances_.emplace_back(prep_, b_, eps_, replica_seed(epoch_seed, i));
  }
  // The output range is set from the label at the start of the epoch.
  double scale = b_.squaredNorm();
  if (!(scale > 0.0)) scale = std::max(1.0, prep_->A.squaredNorm());
  grid_ = std::make_unique<OutputGrid>(1e-12 * scale, 1e8 * scale, 1.01);
  in_epoch_ = 0;
  ++rebuilds_;
}

double RobustRegression::update(const SparseUpdate& upd) {
  if (upd.entries.size() > K_) throw ParameterError("update touches more than K entries");
  validate_update(upd, static_cast<std::size_t>(b_.size()));
  if (in_epoch_ == params_.T) {
    ++epoch_;
    rebuild();
  }
  for (const auto& [index, value] : upd.entries) b_[static_cast<Eigen::Index>(index)] = value;
  std::vector<double> outputs(instances_.size());
  for (std::size_t i = 0; i < instances_.size(); ++i) outputs[i] = instances_[i].update(upd);
  ++in_epoch_;
  ++round_;
  return private_median(outputs, *grid_, params_.eps_round, rng_);
}

std::vector<double> robust_reg_run(const Matrix& A, const Vector& b1, double eps,
                                   const std::vector<SparseUpdate>& updates, std::uint64_t seed) {
  std::size_t K = 1;
  for (const auto& u : updates) K = std::max(K, u.entries.size());
  RobustRegression rr(A, b1, eps, K, seed);
  std::vector<double> out;
  out.reserve(updates.size());
  for (const auto& u : updates) out.push_back(rr.update(u));
  return out;
}

}  // namespace robq

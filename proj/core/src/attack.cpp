#include "robq/attack.hpp"

#include "robq/errors.hpp"
#include "robq/estimators.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace robq {

AttackConfig AttackConfig::desk() { return {}; }

AttackConfig AttackConfig::full() {
  AttackConfig c;
  c.d = 4096;
  c.m = 250;
  c.r = 200;
  c.k = 5;
  c.num_queries = 5000;
  return c;
}

OutputGrid default_norm_grid() { return OutputGrid(1e-3, 4.0, 1.01); }

RobustNorm::RobustNorm(std::size_t d, std::size_t m, std::size_t r, std::size_t k, std::size_t Q,
                       std::uint64_t seed)
    : wrapper_([&](std::uint64_t s) { return FastJlNorm{FastJlMap(m, d, s)}; }, framework_params(r, k, Q, 1),
               default_norm_grid(), seed) {}

Baseline1::Baseline1(std::size_t d, std::size_t m, std::size_t r, std::size_t k, std::uint64_t seed)
    : k_(k), rng_(seed, 1) {
  if (k == 0 || r == 0) throw ParameterError("Baseline1: r and k must be positive");
  maps_.reserve(r);
  for (std::size_t i = 0; i < r; ++i) {
    maps_.push_back(GaussianJlMap(m, d, replica_seed(seed, i)).matrix().cast<float>());
  }
}

double Baseline1::answer(const Vector& q) {
  const Eigen::VectorXf qf = q.cast<float>();
  std::vector<double> norms(k_);
  for (auto& v : norms) v = static_cast<double>((maps_[rng_.uniform_index(maps_.size())] * qf).norm());
  std::sort(norms.begin(), norms.end());
  const std::size_t h = norms.size() / 2;
  return norms.size() % 2 == 1 ? norms[h] : 0.5 * (norms[h - 1] + norms[h]);
}

Baseline2::Baseline2(std::size_t d, std::size_t m, std::size_t r, std::size_t k, std::uint64_t seed)
    : stack_(r, d, seed), samples_(m * k), rng_(seed, 1) {
  if (samples_ == 0) throw ParameterError("Baseline2: m*k must be positive");
}

double Baseline2::answer(const Vector& q) {
  const Vector h = stack_.apply(q);
  std::vector<double> coords(samples_);
  for (auto& c : coords) c = h[static_cast<Eigen::Index>(rng_.uniform_index(static_cast<std::size_t>(h.size())))];
  return ret_norm(coords, TruncationParams::for_eps(0.25));
}

NormAttack::NormAttack(LinearMap pi, std::size_t d, std::uint64_t seed)
    : pi_(std::move(pi)), sum_(Vector::Zero(static_cast<Eigen::Index>(d))), rng_(seed, 7) {
  if (d == 0) throw DimensionError("NormAttack: dimension must be positive");
  pi_e1_ = pi_(Vector::Unit(static_cast<Eigen::Index>(d), 0));
}

Vector NormAttack::next() {
  Vector z(sum_.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng_.normal();
  const Vector pz = pi_(z);
  const bool W = (pz - pi_e1_).norm() <= (pz + pi_e1_).norm();
  if (W) {
    sum_ -= z;
  } else {
    sum_ += z;
  }
  ++issued_;
  const double norm = sum_.norm();
  if (norm == 0.0) return Vector::Unit(sum_.size(), 0);
  return sum_ / norm;
}

std::optional<double> IterationRecord::estimate(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return estimates[i];
  }
  return std::nullopt;
}

std::vector<IterationRecord> run_attack(const AttackConfig& config,
                                        const std::vector<EstimatorUnderTest*>& estimators) {
  NormAttack::LinearMap pi;
  std::shared_ptr<GaussianJlMap> owned;
  for (auto* e : estimators) {
    if (auto* naive = dynamic_cast<NaiveJl*>(e)) {
      pi = [naive](const Vector& v) { return naive->map().apply(v); };
      break;
    }
  }
  if (!pi) {
    owned = std::make_shared<GaussianJlMap>(config.m, config.d, Rng(config.seed).substream(1).next_seed());
    pi = [owned](const Vector& v) { return owned->apply(v); };
  }
  NormAttack attack(pi, config.d, Rng(config.seed).substream(5).next_seed());

  std::vector<std::string> labels;
  for (auto* e : estimators) labels.push_back(e->label());
  std::vector<IterationRecord> out;
  out.reserve(config.num_queries);
  for (std::size_t i = 0; i < config.num_queries; ++i) {
    const Vector q = attack.next();
    IterationRecord rec;
    rec.iteration = i + 1;
    rec.truth = 1.0;  // queries are unit vectors
    rec.labels = labels;
    for (auto* e : estimators) rec.estimates.push_back(e->answer(q));
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<IterationRecord> run_norm_experiment(const AttackConfig& config, bool with_baselines) {
  Rng root(config.seed);
  NaiveJl naive(config.m, config.d, root.substream(1).next_seed());
  RobustNorm robust(config.d, config.m, config.r, config.k, std::max<std::size_t>(config.num_queries, 1),
                    root.substream(2).next_seed());
  std::vector<EstimatorUnderTest*> list{&naive, &robust};
  std::unique_ptr<Baseline1> b1;
  std::unique_ptr<Baseline2> b2;
  if (with_baselines) {
    b1 = std::make_unique<Baseline1>(config.d, config.m, config.r, config.k, root.substream(3).next_seed());
    b2 = std::make_unique<Baseline2>(config.d, config.m, config.r, config.k, root.substream(4).next_seed());
    list.push_back(b1.get());
    list.push_back(b2.get());
  }
  return run_attack(config, list);
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string attack_csv(const std::vector<IterationRecord>& records) {
  static const char* const columns[] = {"naive", "robust", "baseline1", "baseline2"};
  std::ostringstream os;
  os << "iteration,truth,naive,robust,baseline1,baseline2\n";
  for (const auto& rec : records) {
    os << rec.iteration << ',' << fmt(rec.truth);
    for (const char* c : columns) {
      os << ',';
      if (auto v = rec.estimate(c)) os << fmt(*v);
    }
    os << '\n';
  }
  return os.str();
}

double max_deviation(const std::vector<IterationRecord>& records, const std::string& label) {
  double worst = 0.0;
  for (const auto& rec : records) {
    if (auto v = rec.estimate(label)) worst = std::max(worst, std::abs(*v - rec.truth));
  }
  return worst;
}

double fraction_within(const std::vector<IterationRecord>& records, const std::string& label, double lo,
                       double hi) {
  std::size_t hits = 0;
  std::size_t total = 0;
  for (const auto& rec : records) {
    if (auto v = rec.estimate(label)) {
      ++total;
      if (*v >= lo && *v <= hi) ++hits;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

RegressionAdversary::RegressionAdversary(const Matrix& A, const Vector& b0, std::size_t K, std::uint64_t seed,
                                         std::size_t probes, double step_scale)
    : b0_(b0), K_(K), rng_(seed, 11) {
  const auto n = static_cast<std::size_t>(A.rows());
  if (K == 0 || K > n) throw ParameterError("RegressionAdversary: need 1 <= K <= n");
  require_length(b0, n, "RegressionAdversary b0");
  const std::size_t feature_count = (K + 1) * (K + 2) / 2;
  probes_ = std::max(probes, feature_count + 1);

  // K distinct coordinates by partial Fisher-Yates.
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = 0; i < K; ++i) std::swap(perm[i], perm[i + rng_.uniform_index(n - i)]);
  J_.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(K));

  s_ = step_scale * std::sqrt(b0.squaredNorm() / static_cast<double>(n));
  if (!(s_ > 0.0)) s_ = step_scale;

  // True cost as a quadratic form in w = (1, v): b = B w with
  // B = [b0, s e_J1, ..., s e_JK], cost = w^T B^T R B w, R = I - A A^+.
  Matrix B = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(K + 1));
  B.col(0) = b0;
  for (std::size_t j = 0; j < K; ++j) B(static_cast<Eigen::Index>(J_[j]), static_cast<Eigen::Index>(j + 1)) = s_;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
  const Matrix residual = B - A * cod.solve(B);
  true_form_ = residual.transpose() * residual;
}

Vector RegressionAdversary::features(const Vector& w) const {
  Vector f((K_ + 1) * (K_ + 2) / 2);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    for (Eigen::Index j = i; j < w.size(); ++j) f[idx++] = w[i] * w[j] * (i == j ? 1.0 : 2.0);
  }
  return f;
}

Vector RegressionAdversary::fit_and_choose() {
  const auto rows = static_cast<Eigen::Index>(X_.size());
  Matrix F(rows, X_.front().size());
  Vector y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    F.row(i) = X_[static_cast<std::size_t>(i)].transpose();
    y[i] = y_[static_cast<std::size_t>(i)];
  }
  const Vector coef = F.colPivHouseholderQr().solve(y);
  const auto dim = static_cast<Eigen::Index>(K_ + 1);
  Matrix E(dim, dim);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = i; j < dim; ++j) E(i, j) = E(j, i) = coef[idx++];
  }
  Eigen::LLT<Matrix> llt(true_form_);
  Vector v(static_cast<Eigen::Index>(K_));
  if (llt.info() != Eigen::Success) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng_.normal();
    return v;
  }
  const Matrix Linv = llt.matrixL().solve(Matrix::Identity(dim, dim));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Linv * E * Linv.transpose());
  const auto& lam = eig.eigenvalues();
  const Eigen::Index pick = std::abs(lam[0] - 1.0) >= std::abs(lam[dim - 1] - 1.0) ? 0 : dim - 1;
  const Vector u = Linv.transpose() * eig.eigenvectors().col(pick);
  v = std::abs(u[0]) > 1e-3 ? Vector(u.tail(dim - 1) / u[0]) : Vector(u.tail(dim - 1) * 1e3);
  const double nv = v.norm();
  if (nv > 50.0) v *= 50.0 / nv;
  return v;
}

SparseUpdate RegressionAdversary::next() {
  Vector v(static_cast<Eigen::Index>(K_));
  if (X_.size() < probes_) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng_.normal();
  } else {
    v = fit_and_choose();
  }
  pending_ = v;
  SparseUpdate upd;
  for (std::size_t j = 0; j < K_; ++j) {
    upd.entries.emplace_back(J_[j], b0_[static_cast<Eigen::Index>(J_[j])] + s_ * v[static_cast<Eigen::Index>(j)]);
  }
  return upd;
}

void RegressionAdversary::observe(double response) {
  if (!pending_) throw std::logic_error("RegressionAdversary::observe without a pending update");
  Vector w(static_cast<Eigen::Index>(K_ + 1));
  w[0] = 1.0;
  w.tail(static_cast<Eigen::Index>(K_)) = *pending_;
  X_.push_back(features(w));
  y_.push_back(response);
  pending_.reset();
}

std::vector<RegressionAttackRecord> run_regression_attack(
    const Matrix& A, const Vector& b0, std::size_t K, std::size_t rounds, std::uint64_t seed,
    const std::function<double(const SparseUpdate&)>& step) {
  RegressionAdversary adversary(A, b0, K, seed);
  ExactMaintainer exact(A, b0);
  std::vector<RegressionAttackRecord> out;
  out.reserve(rounds);
  for (std::size_t t = 0; t < rounds; ++t) {
    const SparseUpdate upd = adversary.next();
    const double est = step(upd);
    const double truth = exact.update(upd);
    adversary.observe(est);
    out.push_back({t + 1, truth, est});
  }
  return out;
}

bool all_within(const std::vector<RegressionAttackRecord>& records, double eps) {
  for (const auto& r : records) {
    const double floor = 1e-12;
    if (r.truth <= floor) {
      if (std::abs(r.estimate - r.truth) > floor) return false;
    } else if (std::abs(r.estimate / r.truth - 1.0) > eps) {
      return false;
    }
  }
  return true;
}

DistanceChaser::DistanceChaser(const Matrix& X, std::uint64_t seed) : X_(X), rng_(seed, 13) {
  if (X.rows() == 0) throw DegenerateInputError("DistanceChaser needs points");
  const Vector c = X.colwise().mean().transpose();
  const double spread = (X.rowwise() - c.transpose()).rowwise().norm().maxCoeff();
  sigma_ = std::max(spread, 1e-3) / std::sqrt(static_cast<double>(X.cols()));
}

Vector DistanceChaser::next() {
  const std::size_t base = worst_ && rng_.uniform() < 0.5 ? *worst_ : rng_.uniform_index(static_cast<std::size_t>(X_.rows()));
  Vector q = X_.row(static_cast<Eigen::Index>(base)).transpose();
  for (Eigen::Index i = 0; i < q.size(); ++i) q[i] += sigma_ * rng_.normal();
  return q;
}

void DistanceChaser::observe(const Vector& q, const std::vector<double>& estimates) {
  const auto truth = exact_distances(X_, q);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] <= 0.0) continue;
    const double err = std::abs(estimates[i] / truth[i] - 1.0);
    if (err > worst_err_) {
      worst_err_ = err;
      worst_ = i;
    }
  }
}

KdeChaser::KdeChaser(const Matrix& X, std::uint64_t seed) : rng_(seed, 17) {
  if (X.rows() == 0) throw DegenerateInputError("KdeChaser needs points");
  lo_ = X.colwise().minCoeff().transpose();
  hi_ = X.colwise().maxCoeff().transpose();
  sigma_ = std::max(1e-3, 0.1 * (hi_ - lo_).maxCoeff());
}

Vector KdeChaser::next() {
  Vector q(lo_.size());
  if (worst_ && rng_.uniform() < 0.5) {
    for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = (*worst_)[i] + sigma_ * rng_.normal();
  } else {
    for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = lo_[i] + (hi_[i] - lo_[i]) * rng_.uniform();
  }
  return q;
}

void KdeChaser::observe(const Vector& q, double estimate, double truth, bool promise_met) {
  if (!promise_met || truth <= 0.0) return;
  const double err = std::abs(estimate / truth - 1.0);
  if (err > worst_err_) {
    worst_err_ = err;
    worst_ = q;
  }
}

std::vector<Vector> kde_white_box_queries(const NetWrapper& net, const Matrix& X, std::size_t count,
                                          std::uint64_t seed) {
  Rng rng(seed, 19);
  const auto d = static_cast<std::size_t>(X.cols());
  const double R = net.ball_radius();
  const Vector& c = net.center();
  const std::size_t probes = 2000;
  std::vector<std::pair<double, Vector>> scored;
  scored.reserve(probes);
  for (std::size_t p = 0; p < probes; ++p) {
    Vector q(static_cast<Eigen::Index>(d));
    if (d == 1) {
      q[0] = c[0] - R + 2.0 * R * (static_cast<double>(p) + 0.5) / static_cast<double>(probes);
    } else {
      Vector g(static_cast<Eigen::Index>(d));
      for (auto& x : g) x = rng.normal();
      const double radius = R * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
      q = c + radius * g / g.norm();
    }
    const double truth = kde_exact(X, q, net.base().kernel());
    const double est = net.base().value(q);
    // Only queries inside the promise can expose a failure.
    scored.emplace_back(truth >= net.tau() ? std::abs(est / truth - 1.0) : 0.0, q);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  const std::size_t top = std::min<std::size_t>(scored.size(), 50);
  std::vector<Vector> out;
  out.reserve(count);
  const double jitter = 0.5 * net.net_radius();
  for (std::size_t i = 0; i < count; ++i) {
    Vector q = scored[i % top].second;
    for (Eigen::Index j = 0; j < q.size(); ++j) q[j] += jitter * (2.0 * rng.uniform() - 1.0);
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace robq

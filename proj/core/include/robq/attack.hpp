#pragma once

#include "robq/distance.hpp"
#include "robq/kde.hpp"
#include "robq/privacy.hpp"
#include "robq/regression.hpp"
#include "robq/robust.hpp"
#include "robq/transforms.hpp"
#include "robq/types.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace robq {

enum class Scenario { Norm, Regression, Distance, Kde };

struct AttackConfig {
  std::size_t d = 1024;
  std::size_t m = 128;
  std::size_t r = 64;
  std::size_t k = 5;
  std::size_t num_queries = 2000;
  std::uint64_t seed = 1;
  Scenario scenario = Scenario::Norm;

  static AttackConfig desk();
  static AttackConfig full();
};

// Something the adversary queries with a vector and reads a number back.
class EstimatorUnderTest {
 public:
  virtual ~EstimatorUnderTest() = default;
  virtual double answer(const Vector& q) = 0;
  virtual std::string label() const = 0;
};

// Plain Gaussian JL norm estimate ||Pi q||. This is the map the norm attack
// reads when it is in the estimator list.
class NaiveJl : public EstimatorUnderTest {
 public:
  NaiveJl(std::size_t m, std::size_t d, std::uint64_t seed) : map_(m, d, seed) {}
  double answer(const Vector& q) override { return map_.apply(q).norm(); }
  std::string label() const override { return "naive"; }
  const GaussianJlMap& map() const { return map_; }

 private:
  GaussianJlMap map_;
};

class ExactNorm : public EstimatorUnderTest {
 public:
  double answer(const Vector& q) override { return q.norm(); }
  std::string label() const override { return "exact"; }
};

// Norm replica for the robust wrapper: one fast JL map.
struct FastJlNorm {
  FastJlMap map;
  double answer(const Vector& q) const { return map.apply(q).norm(); }
};

// Grid for unit-scale norm answers.
OutputGrid default_norm_grid();

class RobustNorm : public EstimatorUnderTest {
 public:
  RobustNorm(std::size_t d, std::size_t m, std::size_t r, std::size_t k, std::size_t Q, std::uint64_t seed);
  double answer(const Vector& q) override { return wrapper_.query(q); }
  std::string label() const override { return "robust"; }
  const RobustWrapper<FastJlNorm, Vector>& wrapper() const { return wrapper_; }

 private:
  RobustWrapper<FastJlNorm, Vector> wrapper_;
};

// Simplified reconstruction: r Gaussian maps, each query goes to k of them
// (drawn with replacement) and the plain median of their norms is returned.
// Maps are held in single precision.
class Baseline1 : public EstimatorUnderTest {
 public:
  Baseline1(std::size_t d, std::size_t m, std::size_t r, std::size_t k, std::uint64_t seed);
  double answer(const Vector& q) override;
  std::string label() const override { return "baseline1"; }

 private:
  std::vector<Eigen::MatrixXf> maps_;
  std::size_t k_;
  Rng rng_;
};

// Simplified reconstruction: SRHT stack with r blocks, m*k coordinates of the
// full output drawn per query, ret_norm on them.
class Baseline2 : public EstimatorUnderTest {
 public:
  Baseline2(std::size_t d, std::size_t m, std::size_t r, std::size_t k, std::uint64_t seed);
  double answer(const Vector& q) override;
  std::string label() const override { return "baseline2"; }

 private:
  SrhtStack stack_;
  std::size_t samples_;
  Rng rng_;
};

// q_i = normalize(sum_{j<=i} (-1)^{W_j} z_j), W_j = 1 iff
// ||Pi(z_j - e1)|| <= ||Pi(z_j + e1)||.
class NormAttack {
 public:
  using LinearMap = std::function<Vector(const Vector&)>;
  NormAttack(LinearMap pi, std::size_t d, std::uint64_t seed);

  Vector next();
  std::size_t issued() const { return issued_; }
  const Vector& running_sum() const { return sum_; }

 private:
  LinearMap pi_;
  Vector pi_e1_;
  Vector sum_;
  Rng rng_;
  std::size_t issued_ = 0;
};

struct IterationRecord {
  std::size_t iteration = 0;
  double truth = 0.0;
  std::vector<std::string> labels;
  std::vector<double> estimates;

  std::optional<double> estimate(const std::string& label) const;
};

// Runs the norm attack against every estimator. The attacked map is the
// first NaiveJl in the list; without one, a Gaussian map is built from the
// config seed.
std::vector<IterationRecord> run_attack(const AttackConfig& config,
                                        const std::vector<EstimatorUnderTest*>& estimators);

// Builds the standard line-up (naive, robust, baseline1, baseline2) from
// the config and runs the attack.
std::vector<IterationRecord> run_norm_experiment(const AttackConfig& config, bool with_baselines = true);

// iteration,truth,naive,robust,baseline1,baseline2
std::string attack_csv(const std::vector<IterationRecord>& records);

double max_deviation(const std::vector<IterationRecord>& records, const std::string& label);
double fraction_within(const std::vector<IterationRecord>& records, const std::string& label,
                       double lo, double hi);

// Regression adversary: fixes K coordinates, probes them with random values,
// fits the estimator's response as a quadratic form in (1, v) and then plays
// the direction where that form disagrees most with the true cost.
class RegressionAdversary {
 public:
  RegressionAdversary(const Matrix& A, const Vector& b0, std::size_t K, std::uint64_t seed,
                      std::size_t probes = 30, double step_scale = 3.0);

  SparseUpdate next();
  void observe(double response);
  const std::vector<std::size_t>& coordinates() const { return J_; }

 private:
  Vector features(const Vector& w) const;
  Vector fit_and_choose();

  std::vector<std::size_t> J_;
  Vector b0_;
  double s_;
  std::size_t K_;
  std::size_t probes_;
  Matrix true_form_;
  Rng rng_;
  std::vector<Vector> X_;
  std::vector<double> y_;
  std::optional<Vector> pending_;
};

struct RegressionAttackRecord {
  std::size_t round = 0;
  double truth = 0.0;
  double estimate = 0.0;
};

// Plays `rounds` adversarial updates against one estimator; `step` applies
// an update and returns the estimator's output.
std::vector<RegressionAttackRecord> run_regression_attack(
    const Matrix& A, const Vector& b0, std::size_t K, std::size_t rounds, std::uint64_t seed,
    const std::function<double(const SparseUpdate&)>& step);

bool all_within(const std::vector<RegressionAttackRecord>& records, double eps);

// Distance adversary: after each answer it moves to the point whose
// estimate was relatively worst so far and queries a perturbation of it.
class DistanceChaser {
 public:
  DistanceChaser(const Matrix& X, std::uint64_t seed);
  Vector next();
  void observe(const Vector& q, const std::vector<double>& estimates);

 private:
  Matrix X_;
  Rng rng_;
  double sigma_;
  std::optional<std::size_t> worst_;
  double worst_err_ = -1.0;
};

// KDE adversary with oracle access to the true density: half the time a
// fresh random point in the data box, otherwise a perturbation of the query
// with the largest relative error among promise-meeting answers so far.
class KdeChaser {
 public:
  KdeChaser(const Matrix& X, std::uint64_t seed);
  Vector next();
  void observe(const Vector& q, double estimate, double truth, bool promise_met);

 private:
  Vector lo_;
  Vector hi_;
  double sigma_;
  Rng rng_;
  std::optional<Vector> worst_;
  double worst_err_ = -1.0;
};

// White-box queries against a net wrapper: evaluates the estimator's error
// on a dense probe set inside the ball (the sample is known) and returns
// `count` queries cycling through the worst probes with small jitter.
std::vector<Vector> kde_white_box_queries(const NetWrapper& net, const Matrix& X, std::size_t count,
                                          std::uint64_t seed);

}  // namespace robq

// Acceptance run: one PASS/FAIL line per criterion. `--only N` runs a single
// criterion (ctest registers each separately). Thresholds and time budgets
// are fixed below; a criterion that overruns its budget fails.

#include "robq/attack.hpp"
#include "robq/distance.hpp"
#include "robq/fwht.hpp"
#include "robq/io.hpp"
#include "robq/kde.hpp"
#include "robq/leverage.hpp"
#include "robq/privacy.hpp"
#include "robq/regression.hpp"
#include "robq/transforms.hpp"
#include "test_util.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace robq;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

SparseUpdate random_update(std::size_t n, std::size_t K, Rng& rng) {
  SparseUpdate u;
  while (u.entries.size() < K) {
    const auto i = rng.uniform_index(n);
    bool dup = false;
    for (const auto& e : u.entries) dup = dup || e.first == i;
    if (!dup) u.entries.emplace_back(i, rng.normal());
  }
  return u;
}

// 1. fwht(fwht(v)) == d v exactly for +-1 inputs, d up to 2^14.
Outcome fwht_exactness() {
  Rng rng(1);
  for (std::size_t d = 1; d <= (1u << 14); d <<= 1) {
    Vector v(static_cast<Eigen::Index>(d));
    for (auto& x : v) x = rng.sign();
    const Vector twice = fwht(fwht(v));
    if (twice != static_cast<double>(d) * v) return {false, "mismatch at d=" + std::to_string(d)};
  }
  return {true, "exact for d = 1 .. 16384"};
}

// 2. Calibrated m at eps = 0.25, 1000 fresh maps, success >= 0.95.
constexpr double kJlEps = 0.25;
constexpr int kJlSeeds = 1000;
constexpr double kJlRate = 0.95;

template <class Map>
double jl_rate(std::size_t m, std::size_t d) {
  const Vector x = testing::unit_vector(d, 4242);
  int ok = 0;
  for (int s = 0; s < kJlSeeds; ++s) {
    const double n = Map(m, d, 10'000 + static_cast<std::uint64_t>(s)).apply(x).norm();
    ok += n > 1.0 - kJlEps && n < 1.0 + kJlEps;
  }
  return static_cast<double>(ok) / kJlSeeds;
}

Outcome jl_concentration() {
  const std::size_t d = 1024;
  const std::size_t mg = gaussian_jl_rows(kJlEps), mf = fast_jl_rows(d, kJlEps);
  const double g = jl_rate<GaussianJlMap>(mg, d);
  const double f = jl_rate<FastJlMap>(mf, d);
  return {g >= kJlRate && f >= kJlRate, "gaussian m=" + std::to_string(mg) + " rate=" + fmt(g) +
                                            ", fast m=" + std::to_string(mf) + " rate=" + fmt(f)};
}

// 3. Leverage sampling at eps = 0.5 on 500 x 10: >= 99 of 100 seeds embed.
Outcome subspace_embedding() {
  constexpr double eps = 0.5;
  constexpr int seeds = 100, need = 99, probes = 200;
  int good = 0;
  double worst_seen = 0.0;
  for (int s = 0; s < seeds; ++s) {
    const Matrix A = testing::gaussian_matrix(500, 10, 300 + static_cast<std::uint64_t>(s));
    const Matrix SA = sampling_matrix(A, eps, static_cast<std::uint64_t>(s)).apply(A);
    double worst = 0.0;
    for (int j = 0; j < probes; ++j) {
      const Vector x = testing::unit_vector(10, 50'000 + static_cast<std::uint64_t>(j));
      worst = std::max(worst, std::abs((SA * x).squaredNorm() / (A * x).squaredNorm() - 1.0));
    }
    worst_seen = std::max(worst_seen, worst);
    good += worst <= eps;
  }
  return {good >= need, std::to_string(good) + "/100 seeds, worst distortion " + fmt(worst_seen)};
}

// 4. Incremental == batch for the sketch; exact maintainer == oracle.
constexpr double kIncrementalTol = 1e-9;  // relative to max(1, value)
constexpr double kExactTol = 1e-8;         // relative

Outcome regression_oracles() {
  double worst_inc = 0.0, worst_exact = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Matrix A = testing::gaussian_matrix(200, 20, 400 + s);
    Vector b = testing::gaussian_vector(200, 500 + s);
    RegressionSketch sk(A, b, 0.25, s);
    ExactMaintainer ex(A, b);
    Rng rng(s, 40);
    for (int t = 0; t < 100; ++t) {
      const auto u = random_update(200, 5, rng);
      for (auto [i, v] : u.entries) b[static_cast<Eigen::Index>(i)] = v;
      const double inc = sk.update(u);
      const double batch = (sk.M() * sk.S().apply(b) - sk.G() * b).squaredNorm();
      worst_inc = std::max(worst_inc, std::abs(inc - batch) / std::max(1.0, batch));
      const double truth = exact_cost_oracle(A, b);
      worst_exact = std::max(worst_exact, std::abs(ex.update(u) - truth) / truth);
    }
  }
  return {worst_inc <= kIncrementalTol && worst_exact <= kExactTol,
          "sketch max rel diff " + fmt(worst_inc) + ", exact max rel diff " + fmt(worst_exact)};
}

// 5. Adaptive stream: robust in band for >= 90% of 50 seeds, single sketch
// broken in >= 50%.
Outcome robust_regression() {
  constexpr int seeds = 50;
  constexpr double eps = 0.25;
  constexpr std::size_t K = 5, rounds = 100;
  int robust_ok = 0, single_broken = 0;
  for (int s = 0; s < seeds; ++s) {
    const auto seed = static_cast<std::uint64_t>(s);
    const Matrix A = testing::gaussian_matrix(200, 20, 600 + seed);
    const Vector b0 = testing::gaussian_vector(200, 700 + seed);
    RobustRegression robust(A, b0, eps, K, seed);
    RegressionSketch single(A, b0, eps, seed);
    const auto r = run_regression_attack(A, b0, K, rounds, seed, [&](const SparseUpdate& u) { return robust.update(u); });
    const auto g = run_regression_attack(A, b0, K, rounds, seed, [&](const SparseUpdate& u) { return single.update(u); });
    robust_ok += all_within(r, eps);
    single_broken += !all_within(g, eps);
  }
  const bool pass = robust_ok >= 45 && single_broken >= 25;
  return {pass, "robust in band " + std::to_string(robust_ok) + "/50, single sketch broken " +
                    std::to_string(single_broken) + "/50"};
}

// 6. Rank guarantee and empirical likelihood ratios.
Outcome private_median_check() {
  const OutputGrid grid(0.1, 10.0, 1.01);
  if (grid.size() > 1000) return {false, "grid too large"};
  Rng data(60), mech(61);
  int ok = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> v(200);
    for (auto& x : v) x = 1.0 + data.uniform();
    const double out = private_median(v, grid, 1.0, mech);
    const auto rank = std::count_if(v.begin(), v.end(), [&](double x) { return x <= out; });
    ok += rank >= 60 && rank <= 140;
  }
  std::vector<double> a(200);
  for (auto& x : a) x = 1.0 + data.uniform();
  std::vector<double> b = a;
  b[0] = 9.0;
  std::vector<int> ha(grid.size(), 0), hb(grid.size(), 0);
  Rng ra(62), rb(63);
  for (int i = 0; i < 100000; ++i) {
    ++ha[private_median_index(a, grid, 1.0, ra)];
    ++hb[private_median_index(b, grid, 1.0, rb)];
  }
  double worst = 0.0;
  int bins = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (ha[i] < 100 || hb[i] < 100) continue;
    ++bins;
    worst = std::max(worst, std::abs(std::log(static_cast<double>(ha[i]) / hb[i])));
  }
  const bool pass = ok >= 990 && bins > 0 && worst <= 1.2;
  return {pass, "rank ok " + std::to_string(ok) + "/1000, max |log ratio| " + fmt(worst) + " over " +
                    std::to_string(bins) + " bins"};
}

// 7. Calculator values.
Outcome calculators() {
  const auto adv = advanced_composition(100, 0.1, 0.0, std::exp(-2.0));
  const auto amp = subsampling_amplification(1.0, 0.0, 10, 120);
  const bool pass = adv.epsilon == 4.0 && amp.epsilon == 0.5 && amp.delta == 0.0;
  std::ostringstream os;
  os.precision(17);
  os << "advanced eps'=" << adv.epsilon << ", amplified eps'=" << amp.epsilon;
  return {pass, os.str()};
}

// 8. Norm attack at the desk configuration over 20 seeds.
Outcome attack_reproduction() {
  int both = 0, naive_broken = 0, robust_ok = 0;
  double worst_band = 1.0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    AttackConfig c = AttackConfig::desk();
    c.seed = s;
    const auto recs = run_norm_experiment(c, false);
    const bool naive = max_deviation(recs, "naive") >= 0.2;
    const double band = fraction_within(recs, "robust", 0.85, 1.15);
    worst_band = std::min(worst_band, band);
    naive_broken += naive;
    robust_ok += band >= 0.99;
    both += naive && band >= 0.99;
  }
  return {both >= 18, "naive deviated in " + std::to_string(naive_broken) + "/20, robust in band in " +
                          std::to_string(robust_ok) + "/20 (lowest in-band fraction " + fmt(worst_band) +
                          "), both in " + std::to_string(both) + "/20"};
}

// 9. SRHT distance structure under an adaptive chaser.
Outcome adaptive_distance() {
  constexpr std::size_t n = 20, d = 128, Q = 10;
  constexpr double eps = 0.3;
  int ok = 0;
  bool storage = true;
  double worst_all = 0.0;
  for (int s = 0; s < 50; ++s) {
    const auto seed = static_cast<std::uint64_t>(s);
    const Matrix X = testing::gaussian_matrix(n, d, 800 + seed);
    AdeSrht ade(X, Q, eps, seed);
    const auto& p = ade.params();
    storage = storage && ade.sampled_reals() == n * p.r * p.k;
    DistanceChaser chaser(X, 900 + seed);
    double worst = 0.0;
    for (std::size_t t = 0; t < Q; ++t) {
      const Vector q = chaser.next();
      const auto est = ade.query(q);
      chaser.observe(q, est);
      const auto truth = exact_distances(X, q);
      for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(est[i] / truth[i] - 1.0));
    }
    worst_all = std::max(worst_all, worst);
    ok += worst <= eps;
  }
  return {ok >= 48 && storage, std::to_string(ok) + "/50 seeds fully in band (worst rel err " + fmt(worst_all) +
                                   "), storage formula " + (storage ? "exact" : "MISMATCH")};
}

// 10. KDE: sampling estimator, kernel Lipschitz triples, net wrapper.
Outcome kde_suite() {
  // Sampling estimator on promised queries.
  const auto X = std::make_shared<const Matrix>(testing::gaussian_matrix(2000, 2, 1000));
  const Kernel e1(KernelKind::Exp, 1.0);
  constexpr double tau = 0.05, eps = 0.3;
  std::vector<Vector> queries;
  std::vector<double> truths;
  for (const auto& xy : {std::pair{0.0, 0.0}, {1.0, 0.0}, {0.0, -1.5}, {1.5, 1.5}, {-2.0, 0.5}}) {
    Vector q(2);
    q << xy.first, xy.second;
    const double t = kde_exact(*X, q, e1);
    if (t >= tau) {
      queries.push_back(q);
      truths.push_back(t);
    }
  }
  int builds_ok = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    KdeSampleEstimator est(X, eps, tau, 0.01, e1, s);
    bool all = true;
    for (std::size_t j = 0; j < queries.size(); ++j) all = all && std::abs(est.value(queries[j]) / truths[j] - 1.0) <= eps;
    builds_ok += all;
  }

  // Lipschitz triples.
  int violations = 0;
  Rng rng(1001);
  for (const Kernel& k : {Kernel(KernelKind::Exp, 1.5), Kernel(KernelKind::Rational, 0.8)}) {
    for (int t = 0; t < 100000; ++t) {
      Vector x(3), y(3), z(3);
      for (int i = 0; i < 3; ++i) {
        x[i] = 3.0 * rng.normal();
        y[i] = 3.0 * rng.normal();
        z[i] = y[i] + (t % 2 ? 1e-3 : 1.0) * rng.normal();
      }
      violations += std::abs(k(x, y) - k(x, z)) > k.lipschitz() * (y - z).norm() * (1 + 1e-12) + 1e-15;
    }
  }

  // Net wrapper, d = 1, 10 |N| white-box queries per seed.
  constexpr int net_seeds = 20;
  int net_ok = 0;
  std::size_t net_size = 0;
  for (int s = 0; s < net_seeds; ++s) {
    Rng data(2000 + static_cast<std::uint64_t>(s));
    Matrix P(1000, 1);
    for (Eigen::Index i = 0; i < P.rows(); ++i) P(i, 0) = data.uniform();
    NetWrapper net(P, eps, 0.2, e1, 0.0, 0.0, static_cast<std::uint64_t>(s));
    net_size = net.net_size();
    bool all = true;
    for (const auto& q : kde_white_box_queries(net, P, 10 * net.net_size(), 3000 + static_cast<std::uint64_t>(s))) {
      const double truth = kde_exact(P, q, e1);
      if (truth < 0.2) continue;
      all = all && std::abs(net.query(q).value / truth - 1.0) <= eps;
    }
    net_ok += all;
  }
  const bool pass = builds_ok >= 194 && violations == 0 && net_ok >= 19;
  return {pass, "sampling " + std::to_string(builds_ok) + "/200 builds on " + std::to_string(queries.size()) +
                    " queries, Lipschitz violations " + std::to_string(violations) + ", net (|N|=" +
                    std::to_string(net_size) + ") " + std::to_string(net_ok) + "/" + std::to_string(net_seeds) +
                    " seeds"};
}

// 11. Every subcommand twice with a fixed seed: byte-identical output.
struct Captured {
  int status = -1;
  std::string out;
};

Captured capture(const std::string& args) {
  Captured c;
  const std::string cmd = std::string(ROBQ_TOOL_PATH) + " " + args + " 2>/dev/null";
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return c;
  char buf[1 << 14];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, f)) > 0) c.out.append(buf, got);
  const int raw = pclose(f);
  c.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return c;
}

Outcome determinism() {
  const auto dir = fs::temp_directory_path() / "robq_acceptance";
  fs::create_directories(dir);
  const std::string stream = (dir / "updates.jsonl").string();
  Rng rng(1100);
  std::vector<SparseUpdate> ups;
  for (int t = 0; t < 40; ++t) ups.push_back(random_update(200, 5, rng));
  write_file_atomic(stream, update_stream_jsonl(ups));

  const std::vector<std::string> commands = {
      "attack --seed 9",
      "regression --seed 9 --oracle --stream " + stream,
      "distance --seed 9 --oracle",
      "distance --seed 9 --mode fastjl --queries 3 --rows 5 --cols 32",
      "kde --seed 9 --oracle",
      "selftest",
  };
  std::string bad;
  for (const auto& cmd : commands) {
    const auto a = capture(cmd), b = capture(cmd);
    if (a.status != 0 || b.status != 0 || a.out != b.out || a.out.empty()) bad += " [" + cmd + "]";
  }
  fs::remove_all(dir);
  if (!bad.empty()) return {false, "differing or failing:" + bad};
  return {true, std::to_string(commands.size()) + " invocations byte-identical"};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: robq_acceptance [--only N]\n";
      return 1;
    }
  }

  const std::vector<Criterion> criteria = {
      {1, "fwht exactness", 1, fwht_exactness},
      {2, "JL concentration", 10, jl_concentration},
      {3, "subspace embedding", 30, subspace_embedding},
      {4, "regression oracle equivalence", 10, regression_oracles},
      {5, "robust regression under adaptivity", 120, robust_regression},
      {6, "private median", 30, private_median_check},
      {7, "composition calculators", 1, calculators},
      {8, "norm attack reproduction", 120, attack_reproduction},
      {9, "adaptive distance estimation", 60, adaptive_distance},
      {10, "KDE suite", 120, kde_suite},
      {11, "CLI determinism", 60, determinism},
  };

  int failed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::cout << "criterion " << c.id << " " << (pass ? "PASS" : "FAIL") << " " << c.name << ": " << o.detail
              << "; " << fmt(secs) << "s of " << c.budget_s << "s" << (in_time ? "" : " (over budget)") << std::endl;
  }
  if (ran == 0) {
    std::cerr << "no criterion " << only << "\n";
    return 1;
  }
  return failed == 0 ? 0 : 1;
}

#include "robq_cli/cli.hpp"

#include "robq/estimators.hpp"
#include "robq/fwht.hpp"
#include "robq/io.hpp"
#include "robq/kde.hpp"
#include "robq/leverage.hpp"
#include "robq/privacy.hpp"
#include "robq/regression.hpp"
#include "robq/transforms.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace robq::cli {

namespace {

struct Check {
  const char* suite;
  const char* name;
  std::function<bool()> body;
};

Matrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix X(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
  return X;
}

std::vector<Check> checks() {
  return {
      {"transforms", "fwht involution", [] {
         Rng rng(1);
         Vector v(1 << 10);
         for (auto& x : v) x = rng.sign();
         return fwht(fwht(v)) == static_cast<double>(v.size()) * v;
       }},
      {"transforms", "jl linearity", [] {
         FastJlMap f(64, 300, 3);
         GaussianJlMap g(64, 300, 3);
         const Vector x = gaussian(300, 1, 4).col(0);
         return (f.apply(2.0 * x) - 2.0 * f.apply(x)).norm() < 1e-12 &&
                (g.apply(2.0 * x) - 2.0 * g.apply(x)).norm() < 1e-12;
       }},
      {"transforms", "srht zero", [] { return SrhtStack(3, 10, 5).apply(Vector::Zero(10)).isZero(0.0); }},
      {"estimators", "ret_norm constant", [] {
         const std::vector<double> c(9, 2.0);
         return std::abs(ret_norm(c, TruncationParams::for_eps(0.25)) - std::sqrt(std::acos(-1.0) / 2.0) * 2.0) < 1e-12;
       }},
      {"estimators", "quantile", [] { return quantile(std::vector<double>{1, 2, 3, 4}, 0.5) == 2.0; }},
      {"leverage", "scores sum to rank", [] {
         const auto s = compute_leverage_scores(gaussian(50, 5, 6));
         double sum = 0.0;
         for (double t : s.tau) sum += t;
         return std::abs(sum - 5.0) < 1e-9;
       }},
      {"leverage", "sampler point mass", [] {
         SamplerTree t({0.0, 0.0, 3.0, 0.0});
         Rng rng(7);
         for (int i = 0; i < 1000; ++i) {
           if (t.sample(rng) != 2) return false;
         }
         return true;
       }},
      {"privacy", "median distribution sums to one", [] {
         const OutputGrid g(0.1, 10.0, 1.01);
         const std::vector<double> v{1.0, 1.5, 2.0, 2.5, 3.0};
         double total = 0.0;
         for (double p : private_median_distribution(v, g, 1.0)) total += p;
         return std::abs(total - 1.0) < 1e-12;
       }},
      {"privacy", "composition formulas", [] {
         return advanced_composition(100, 0.1, 0.0, std::exp(-2.0)).epsilon == 4.0 &&
                subsampling_amplification(1.0, 0.0, 100, 1200).epsilon == 0.5;
       }},
      {"regression", "incremental equals batch", [] {
         const Matrix A = gaussian(200, 20, 8);
         const Vector b = gaussian(200, 1, 9).col(0);
         RegressionSketch sk(A, b, 0.25, 10);
         Rng rng(11);
         for (int t = 0; t < 20; ++t) {
           SparseUpdate u;
           for (int j = 0; j < 5; ++j) u.entries.emplace_back(static_cast<std::size_t>(40 * j) + rng.uniform_index(40), rng.normal());
           const double inc = sk.update(u);
           if (std::abs(inc - sk.recompute()) > 1e-9 * std::max(1.0, inc)) return false;
         }
         return true;
       }},
      {"regression", "exact maintainer", [] {
         const Matrix A = gaussian(100, 10, 12);
         Vector b = gaussian(100, 1, 13).col(0);
         ExactMaintainer ex(A, b);
         Rng rng(14);
         for (int t = 0; t < 20; ++t) {
           SparseUpdate u;
           const std::size_t i = rng.uniform_index(100);
           u.entries.emplace_back(i, rng.normal());
           b[static_cast<Eigen::Index>(i)] = u.entries[0].second;
           const double oracle = exact_cost_oracle(A, b);
           if (std::abs(ex.update(u) - oracle) > 1e-8 * oracle) return false;
         }
         return true;
       }},
      {"kde", "kernel lipschitz", [] {
         Rng rng(15);
         for (const Kernel k : {Kernel(KernelKind::Exp, 2.0), Kernel(KernelKind::Rational, 0.5)}) {
           for (int t = 0; t < 2000; ++t) {
             Vector x(3), y(3), z(3);
             for (int i = 0; i < 3; ++i) {
               x[i] = rng.normal();
               y[i] = rng.normal();
               z[i] = rng.normal();
             }
             if (std::abs(k(x, y) - k(x, z)) > k.lipschitz() * (y - z).norm() + 1e-15) return false;
           }
         }
         return true;
       }},
      {"io", "atomic write", [] {
         const auto path = (std::filesystem::temp_directory_path() / "robq_selftest.csv").string();
         write_file_atomic(path, "a,b\n1,2\n");
         const bool ok = read_file(path) == "a,b\n1,2\n" && !std::filesystem::exists(path + ".tmp");
         std::filesystem::remove(path);
         return ok;
       }},
  };
}

}  // namespace

int run_selftest(std::ostream& out) {
  int failed = 0;
  std::string suite;
  int suite_pass = 0;
  int suite_total = 0;
  auto flush = [&] {
    if (!suite.empty()) {
      out << suite << ": " << suite_pass << "/" << suite_total << (suite_pass == suite_total ? " ok" : " FAILED") << '\n';
    }
  };
  for (const auto& c : checks()) {
    if (suite != c.suite) {
      flush();
      suite = c.suite;
      suite_pass = suite_total = 0;
    }
    ++suite_total;
    bool ok = false;
    try {
      ok = c.body();
    } catch (const std::exception& ex) {
      out << "  " << c.name << ": exception: " << ex.what() << '\n';
    }
    if (ok) {
      ++suite_pass;
    } else {
      ++failed;
      out << "  " << c.name << ": FAILED\n";
    }
  }
  flush();
  out << (failed == 0 ? "selftest: all checks passed\n" : "selftest: " + std::to_string(failed) + " check(s) failed\n");
  return failed;
}

}  // namespace robq::cli

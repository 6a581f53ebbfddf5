#include <doctest.h>

#include <cmath>
#include <limits>

#include "sbm/error.hpp"
#include "sbm/moments.hpp"
#include "sbm/rng.hpp"
#include "support/random_models.hpp"

using namespace sbm;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Nontrivial eigenvalues of T straight from a general eigensolver.
std::vector<std::complex<double>> nontrivial(const BlockModel& m) {
  const Eigen::MatrixXd T = m.M() * m.pi().asDiagonal() / m.d();
  Eigen::EigenSolver<Eigen::MatrixXd> es(T);
  std::vector<std::complex<double>> ev(es.eigenvalues().begin(), es.eigenvalues().end());
  std::sort(ev.begin(), ev.end(), [](auto a, auto b) { return std::abs(a - 1.0) < std::abs(b - 1.0); });
  ev.erase(ev.begin());
  return ev;
}

// Sum over all (s^2)^n cell sequences.
double brute_multinomial(const Eigen::VectorXd& pi, const Eigen::MatrixXd& At, int n, double half_width) {
  const int s = static_cast<int>(pi.size());
  const int cells = s * s;
  Eigen::VectorXd p(cells);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) p[i * s + j] = pi[i] * pi[j];
  std::vector<int> seq(n, 0);
  double total = 0.0;
  while (true) {
    Eigen::VectorXd N = Eigen::VectorXd::Zero(cells);
    double prob = 1.0;
    for (int c : seq) {
      N[c] += 1;
      prob *= p[c];
    }
    bool inside = true;
    for (int i = 0; i < s; ++i) {
      double row = 0.0;
      double col = 0.0;
      for (int j = 0; j < s; ++j) {
        row += N[i * s + j];
        col += N[j * s + i];
      }
      inside &= std::abs(row - n * pi[i]) <= half_width && std::abs(col - n * pi[i]) <= half_width;
    }
    if (inside) {
      const Eigen::VectorXd X = (N - n * p) / std::sqrt(static_cast<double>(n));
      total += prob * std::exp(X.dot(At * X));
    }
    int k = 0;
    while (k < n && ++seq[k] == cells) seq[k++] = 0;
    if (k == n) break;
  }
  return total;
}

}  // namespace

TEST_CASE("psi examples") {
  CHECK(psi(0.0) == 1.0);
  CHECK(psi(0.5) == doctest::Approx(std::sqrt(2.0) * std::exp(-0.3125)).epsilon(1e-14));
  CHECK(psi(0.5) == doctest::Approx(1.03466).epsilon(1e-5));
  CHECK(psi(0.999) > 10.0);
  CHECK_THROWS_AS(psi(1.0), Error);
}

TEST_CASE("second_moment_limit examples") {
  CHECK(second_moment_limit(spectral_summary(erdos_renyi_model(Eigen::Vector2d(0.5, 0.5), 2.0))) ==
        doctest::Approx(1.0));
  // d = 1, lambda_2 = 0.5: balanced a = 1.5.
  CHECK(second_moment_limit(spectral_summary(two_cluster_model(0.5, 1.5, 1.0))) ==
        doctest::Approx(psi(0.25)).epsilon(1e-12));
  CHECK(psi(0.25) == doctest::Approx(1.0032212132).epsilon(1e-9));
  CHECK(second_moment_limit(spectral_summary(two_cluster_model(0.5, 2.0, 4.0))) == kInf);
}

TEST_CASE("nu terms") {
  const NuTerms zero = nu_terms(spectral_summary(erdos_renyi_model(Eigen::Vector3d(0.2, 0.3, 0.5), 2.0)));
  CHECK(std::abs(zero.nu1) < 1e-15);
  CHECK(std::abs(zero.nu2) < 1e-15);
  // d = 2, lambda_2 = 0.3: balanced a = 1.3.
  const NuTerms t = nu_terms(spectral_summary(two_cluster_model(0.5, 1.3, 2.0)));
  CHECK(t.nu1 == doctest::Approx(-0.09).epsilon(1e-12));
  CHECK(t.nu2 == doctest::Approx(-0.0081).epsilon(1e-12));
  CHECK(std::abs(t.nu1 - t.nu1_eigen) < 1e-12);
  CHECK(std::abs(t.nu2 - t.nu2_eigen) < 1e-12);
}

TEST_CASE("closed forms against a general eigensolver") {
  Rng rng(derive_stream(31, "moments-test"));
  for (int trial = 0; trial < 40; ++trial) {
    const int s = 2 + static_cast<int>(rng.below(4));
    const BlockModel m = testing::random_model(rng, s, 0.9);
    const auto spec = spectral_summary(m);
    const auto ev = nontrivial(m);
    const double d = m.d();
    std::complex<double> log_psi = 0.0;
    std::complex<double> nu1 = 0.0;
    std::complex<double> nu2 = 0.0;
    std::complex<double> log_gauss = 0.0;
    for (auto li : ev)
      for (auto lj : ev) {
        const auto x = d * li * lj;
        log_psi += -0.5 * std::log(1.0 - x) - x / 2.0 - x * x / 4.0;
        log_gauss += -0.5 * std::log(1.0 - x);
        nu1 += -0.5 * x;
        nu2 += -0.25 * x * x;
      }
    const NuTerms nu = nu_terms(spec);
    CHECK(nu.nu1 == doctest::Approx(nu1.real()).epsilon(1e-10));
    CHECK(nu.nu2 == doctest::Approx(nu2.real()).epsilon(1e-10));
    CHECK(second_moment_limit(spec) == doctest::Approx(std::exp(log_psi.real())).epsilon(1e-10));
    CHECK(gaussian_exp_moment(spec) == doctest::Approx(std::exp(log_gauss.real())).epsilon(1e-10));
    CHECK(gaussian_exp_moment_kron(m) == doctest::Approx(gaussian_exp_moment(spec)).epsilon(1e-9));
  }
}

TEST_CASE("gaussian_exp_moment examples") {
  CHECK(gaussian_exp_moment(spectral_summary(erdos_renyi_model(Eigen::Vector2d(0.5, 0.5), 2.0))) ==
        doctest::Approx(1.0));
  // d = 1, lambda_2 = 0.6.
  CHECK(gaussian_exp_moment(spectral_summary(two_cluster_model(0.5, 1.6, 1.0))) ==
        doctest::Approx(1.25).epsilon(1e-12));
  CHECK(gaussian_exp_moment(spectral_summary(two_cluster_model(0.5, 2.0, 4.0))) == kInf);
}

TEST_CASE("window validation") {
  CHECK_THROWS_AS(make_window(0.5), Error);
  CHECK_THROWS_AS(make_window(1.2), Error);
  const BalanceWindow w = make_window(0.75);
  const std::vector<int> inside = {50, 50};
  const std::vector<int> outside = {90, 10};
  CHECK(w.contains(inside, Eigen::Vector2d(0.5, 0.5), 100));
  CHECK_FALSE(w.contains(outside, Eigen::Vector2d(0.5, 0.5), 100));
}

TEST_CASE("grouped and direct pair products agree") {
  Rng rng(derive_stream(32, "moments-test"));
  for (int trial = 0; trial < 20; ++trial) {
    const int s = 2 + static_cast<int>(rng.below(3));
    const BlockModel m = testing::random_model(rng, s, 0.9);
    const int n = 40;
    std::vector<int> sigma(n);
    std::vector<int> tau(n);
    for (int v = 0; v < n; ++v) {
      sigma[v] = static_cast<int>(rng.below(s));
      tau[v] = static_cast<int>(rng.below(s));
    }
    const Eigen::MatrixXi N = coupling_counts(sigma, tau, s);
    CHECK(N.sum() == n);
    CHECK(log_pair_product(m, n, N) == doctest::Approx(log_pair_product_direct(m, sigma, tau)).epsilon(1e-12));
  }
}

TEST_CASE("empirical second moment") {
  const BlockModel flat = erdos_renyi_model(Eigen::Vector2d(0.3, 0.7), 2.0);
  const EmpiricalMoment e = empirical_second_moment(flat, 500, 50, BalanceWindow{}, 1);
  CHECK(e.estimate == 1.0);
  CHECK(e.std_error == 0.0);
  const BlockModel m = two_cluster_model(0.5, 1.4, 2.0);
  const auto a = empirical_second_moment(m, 300, 200, BalanceWindow{}, 7, 1);
  const auto b = empirical_second_moment(m, 300, 200, BalanceWindow{}, 7, 3);
  CHECK(a.estimate == b.estimate);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("exact tiny second moment") {
  const BlockModel flat = erdos_renyi_model(Eigen::Vector2d(0.3, 0.7), 1.0);
  for (int n = 2; n <= 4; ++n) CHECK(exact_tiny_second_moment(flat, n).graph_enumeration == doctest::Approx(1.0).epsilon(1e-12));

  // n = 2 oracle: one vertex pair, independent labels.
  Eigen::MatrixXd M(2, 2);
  M << 1.5, 0.5, 0.5, 1.5;
  const BlockModel m = build_model(Eigen::Vector2d(0.5, 0.5), M);
  const double q0 = m.d() / 2.0;
  double oracle = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int e = 0; e < 2; ++e) {
          const double ps = M(a, b) / 2.0;
          const double pt = M(c, e) / 2.0;
          oracle += 0.0625 * (ps * pt / q0 + (1 - ps) * (1 - pt) / (1 - q0));
        }
  const auto r = exact_tiny_second_moment(m, 2);
  CHECK(r.graph_enumeration == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(r.pair_product == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(exact_tiny_normalization(m, 4) == doctest::Approx(1.0).epsilon(1e-12));

  Eigen::MatrixXd hot(2, 2);
  hot << 3, 1, 1, 3;
  CHECK_THROWS_AS(exact_tiny_second_moment(build_model(Eigen::Vector2d(0.5, 0.5), hot), 2), Error);
  CHECK_THROWS_AS(exact_tiny_second_moment(flat, 7), Error);
}

TEST_CASE("multinomial sum against sequence enumeration") {
  Rng rng(derive_stream(33, "moments-test"));
  for (int trial = 0; trial < 6; ++trial) {
    const int s = trial < 4 ? 2 : 3;
    const int n = s == 2 ? 6 : 4;
    const BlockModel m = testing::random_model(rng, s, 0.9);
    const Eigen::MatrixXd K = quadratic_kernel(m);
    const BalanceWindow w{0.55};
    CHECK(multinomial_exp_moment(m.pi(), K, n, w) ==
          doctest::Approx(brute_multinomial(m.pi(), K, n, w.half_width(n))).epsilon(1e-10));
  }
  const Eigen::Vector2d pi(0.2, 0.8);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(4, 4);
  const double mass = multinomial_exp_moment(pi, zero, 6, BalanceWindow{0.55});
  CHECK(mass == doctest::Approx(brute_multinomial(pi, zero, 6, std::pow(6.0, 0.55))).epsilon(1e-12));
  CHECK(mass > 0.0);
  CHECK(mass < 1.0);
  CHECK(multinomial_exp_moment(pi, zero, 400, BalanceWindow{}) > mass);
  CHECK_THROWS_AS(multinomial_exp_moment(Eigen::Vector3d(0.2, 0.3, 0.5), Eigen::MatrixXd::Zero(9, 9), 33, BalanceWindow{}),
                  Error);
}

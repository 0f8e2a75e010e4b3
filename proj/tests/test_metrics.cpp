#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dfw/metrics.hpp"
#include "oracles.hpp"

using dfw::Matrix;

TEST_CASE("subspace distance") {
  for (double theta : {0.0, 0.1, 0.7, std::numbers::pi / 2, 2.5}) {
    const dfw::OrthonormalRows a(Matrix{{1.0, 0.0}});
    const dfw::OrthonormalRows b(Matrix{{std::cos(theta), std::sin(theta)}});
    CHECK(dfw::subspace_distance(a, b) == doctest::Approx(std::abs(std::sin(theta))).epsilon(1e-12));
  }
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto a = dfw::gen_shared_representation(9, 3, 2 * s);
    const auto b = dfw::gen_shared_representation(9, 3, 2 * s + 1);
    const double d = dfw::subspace_distance(a, b);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0 + 1e-12);
    CHECK(d == doctest::Approx(dfw::subspace_distance(b, a)).epsilon(1e-10));
    CHECK(d == doctest::Approx(dfw::subspace_distance_via_angles(a, b)).epsilon(1e-8));
    const Matrix q = dfw::random_rotation(9, 1.0, 100 + s);
    const dfw::OrthonormalRows aq(a.mat() * q), bq(b.mat() * q);
    CHECK(dfw::subspace_distance(aq, bq) == doctest::Approx(d).epsilon(1e-10));
    const dfw::OrthonormalRows mixed(dfw::random_rotation(3, 1.0, s) * a.mat());
    CHECK(dfw::subspace_distance(mixed, a) <= 1e-12);
  }
  CHECK_THROWS_AS(dfw::subspace_distance(dfw::gen_shared_representation(4, 2, 1),
                                         dfw::gen_shared_representation(5, 2, 1)),
                  dfw::Error);
}

TEST_CASE("task diversity") {
  const std::vector<Matrix> f{Matrix{{1.0, 0.0}}, Matrix{{0.0, 2.0}}};
  const auto s = dfw::diversity_stats(f);
  CHECK(s.lambda_f_min == doctest::Approx(0.5));
  CHECK(s.lambda_f_max == doctest::Approx(2.0));
  CHECK(s.kappa_f == doctest::Approx(4.0));
  const std::vector<Matrix> one{Matrix::Identity(3, 3)};
  CHECK(dfw::diversity_stats(one).kappa_f == doctest::Approx(1.0));

  const auto g = dfw::gen_task_weights(5, 3, 6, 0.5, 2);
  std::vector<Matrix> scaled;
  for (const auto& m : g) scaled.push_back(3.0 * m);
  const auto base = dfw::diversity_stats(g);
  const auto big = dfw::diversity_stats(scaled);
  CHECK(big.lambda_f_min == doctest::Approx(9.0 * base.lambda_f_min));
  CHECK(big.lambda_f_max == doctest::Approx(9.0 * base.lambda_f_max));
  CHECK(big.kappa_f == doctest::Approx(base.kappa_f));

  Matrix avg = Matrix::Zero(3, 3);
  for (const auto& m : g) avg += oracle::matmul(m.transpose(), m);
  const auto ev = oracle::jacobi_eigenvalues(avg / 6.0);
  CHECK(base.lambda_f_min == doctest::Approx(ev.front()).epsilon(1e-10));
  CHECK(base.lambda_f_max == doctest::Approx(ev.back()).epsilon(1e-10));
  CHECK_THROWS_AS(dfw::diversity_stats(std::vector<Matrix>{}), dfw::Error);
}

TEST_CASE("noise statistics") {
  auto p = dfw::gen_regression_problem(6, 3, 2, 4, 0.5, 0.2, 1);
  for (auto& s : p.truth.sigma_x) s = Matrix::Identity(6, 6);
  double mean_f = 0.0;
  for (const auto& f : p.truth.f_star) mean_f += std::pow(oracle::power_norm(f), 2);
  mean_f /= 4.0;
  const auto n = dfw::noise_stats(p);
  CHECK(n.sigma_avg == doctest::Approx(0.5 * std::sqrt(mean_f)).epsilon(1e-8));
  for (double k : n.kappa_x) CHECK(k == doctest::Approx(1.0));

  auto louder = p;
  for (auto& s : louder.truth.sigma_w) s *= 3.0;
  const auto m = dfw::noise_stats(louder);
  CHECK(m.sigma_avg == doctest::Approx(3.0 * n.sigma_avg));
  CHECK(m.sigma_bar_f_sq == doctest::Approx(9.0 * n.sigma_bar_f_sq));

  auto quiet = p;
  for (auto& s : quiet.truth.sigma_w) s = 0.0;
  CHECK(dfw::noise_stats(quiet).sigma_avg == 0.0);
  CHECK(dfw::noise_stats(quiet).sigma_bar_f_sq == 0.0);

  const std::vector<dfw::MixingDiagnostics> mix(4, dfw::MixingDiagnostics{2.0, 0.5});
  const double tau = mix[0].tau_mix(100.0, 0.05);
  CHECK(dfw::noise_stats(p, mix, 100.0, 0.05).sigma_avg == doctest::Approx(std::sqrt(tau) * n.sigma_avg));
  CHECK_THROWS_AS(dfw::noise_stats(p, std::span(mix).first(2)), dfw::Error);
}

TEST_CASE("burn-in report") {
  const auto p = dfw::gen_regression_problem(10, 5, 2, 25, 0.1, 0.01, 3);
  const auto at_truth = dfw::burnin_report(p, p.truth.phi_star, {1000, 1000, 1e-6, 0.05, {}});
  CHECK(at_truth.all_pass());
  CHECK(at_truth.conditions.size() == 5);
  CHECK(at_truth.conditions.front().name == "initial_distance");

  const auto short_n2 = dfw::burnin_report(p, p.truth.phi_star, {1000, 9, 0.0, 0.05, {}});
  CHECK(!short_n2.all_pass());
  bool whitening_failed = false;
  for (const auto& c : short_n2.conditions) {
    if (c.name == "n2_whitening") whitening_failed = !c.pass && c.margin < 0.0;
  }
  CHECK(whitening_failed);

  const auto far = dfw::burnin_report(p, dfw::gen_shared_representation(10, 2, 77), {1000, 1000, 0.0, 0.05, {}});
  CHECK(!far.conditions.front().pass);
  for (const auto& c : far.conditions) CHECK(c.pass == (c.margin >= 0.0));

  const auto big_step = dfw::burnin_report(p, p.truth.phi_star, {1000, 1000, 10.0, 0.05, {}});
  CHECK(!big_step.conditions.back().pass);

  const double radius = dfw::burnin_radius(p);
  const auto div = dfw::diversity_stats(p.truth.f_star);
  const auto ev = oracle::jacobi_eigenvalues(p.truth.sigma_x[0]);
  CHECK(radius == doctest::Approx(0.01 * std::sqrt(div.lambda_f_min / div.lambda_f_max) / (ev.back() / ev.front()))
                      .epsilon(1e-8));
}

TEST_CASE("mixing diagnostics") {
  const auto zero = dfw::mixing_bound_sysid(Matrix{{0.0}}, Matrix{{1.0}}, 2.0, 0.5);
  CHECK(zero.gamma == doctest::Approx(std::sqrt(7.0 / 3.0)));
  CHECK(zero.mu == 0.5);
  // S = 4/3, ||Sigma^-1||_* / (1 - mu^2) = 4/3
  const auto scalar = dfw::mixing_bound_sysid(Matrix{{0.5}}, Matrix{{1.0}}, 2.0, 0.5);
  CHECK(scalar.gamma == doctest::Approx(std::sqrt(8.0 / 3.0)));
  CHECK(dfw::mixing_bound_sysid(Matrix{{0.5}}, Matrix{{1.0}}, 2.0, 0.6).gamma ==
        doctest::Approx(std::sqrt(4.0 / 3.0 + 1.0 / 0.64)));
  CHECK_THROWS_AS(dfw::mixing_bound_sysid(Matrix{{0.9}}, Matrix{{1.0}}, 2.0, 0.5), dfw::Error);
  CHECK_THROWS_AS(dfw::mixing_bound_sysid(Matrix{{0.1}}, Matrix{{1.0}}, 2.0, 1.0), dfw::Error);

  const dfw::MixingDiagnostics d{3.0, 0.8};
  CHECK(d.tau_mix(1.0, 0.9) >= 1.0);
  CHECK(d.tau_mix(1e6, 0.05) >= d.tau_mix(1e3, 0.05));
  CHECK(d.tau_mix(1e3, 0.01) >= d.tau_mix(1e3, 0.1));
  CHECK(d.tau_mix(1e3, 0.05) == doctest::Approx(std::log(3.0 * 1e3 / 0.05) / std::log(1.0 / 0.8)));
  CHECK(dfw::MixingDiagnostics{1.0, 0.0}.tau_mix(1e9, 1e-9) == 1.0);

  CHECK(dfw::estimate_gelfand_constant(Matrix{{0.5}}, 0.6) == doctest::Approx(1.0));
  CHECK(dfw::estimate_gelfand_constant(Matrix{{0.0, 1.0}, {0.0, 0.0}}, 0.5) == doctest::Approx(2.0));
}

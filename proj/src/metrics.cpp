#include "dfw/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace dfw {

namespace {

void require_same_shape(const OrthonormalRows& a, const OrthonormalRows& b) {
  if (a.dim() != b.dim() || a.rank() != b.rank()) {
    throw Error(ErrorKind::kDimensionMismatch,
                fmt::format("representations are {}x{} and {}x{}", a.rank(), a.dim(), b.rank(), b.dim()));
  }
}

double safe_ratio(double num, double den) {
  return den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
}

}  // namespace

double subspace_distance(const OrthonormalRows& rep, const OrthonormalRows& truth) {
  require_same_shape(rep, truth);
  if (truth.rank() == truth.dim()) return 0.0;
  const OrthonormalRows perp = orthonormal_complement(truth);
  return spectral_norm(rep.mat() * perp.mat().transpose());
}

double subspace_distance_via_angles(const OrthonormalRows& rep, const OrthonormalRows& truth) {
  require_same_shape(rep, truth);
  const Matrix overlap = rep.mat() * truth.mat().transpose();
  const Vector sv = Eigen::JacobiSVD<Matrix>(overlap).singularValues();
  const double c = std::min(1.0, sv(sv.size() - 1));
  return std::sqrt(std::max(0.0, 1.0 - c * c));
}

DiversityStats diversity_stats(std::span<const Matrix> f_star) {
  if (f_star.empty()) throw Error(ErrorKind::kInvalidArgument, "need at least one task weight");
  const Eigen::Index r = f_star.front().cols();
  Matrix avg = Matrix::Zero(r, r);
  for (const auto& f : f_star) {
    if (f.cols() != r || f.rows() != f_star.front().rows()) {
      throw Error(ErrorKind::kDimensionMismatch, "task weights have inconsistent shapes");
    }
    avg += f.transpose() * f;
  }
  avg /= static_cast<double>(f_star.size());
  const auto ext = symmetric_eigen_extremes(avg);
  const double lo = std::max(0.0, ext.min);
  return {lo, ext.max, safe_ratio(ext.max, lo)};
}

double MixingDiagnostics::tau_mix(double n, double delta) const {
  if (mu <= 0.0) return 1.0;
  return std::max(std::log(gamma * n / delta) / std::log(1.0 / mu), 1.0);
}

NoiseStats noise_stats(const MultiTaskProblem& problem, std::span<const MixingDiagnostics> mixing,
                       double n, double delta) {
  const auto& truth = problem.truth;
  const std::size_t tasks = truth.f_star.size();
  if (!mixing.empty() && mixing.size() != tasks) {
    throw Error(ErrorKind::kDimensionMismatch, "need one mixing diagnostic per task");
  }
  const DiversityStats div = diversity_stats(truth.f_star);

  NoiseStats out;
  double avg_sq = 0.0;
  double worst_f = 0.0;
  double avg_f = 0.0;
  for (std::size_t t = 0; t < tasks; ++t) {
    const auto ext = symmetric_eigen_extremes(truth.sigma_x[t]);
    out.kappa_x.push_back(safe_ratio(ext.max, ext.min));
    const double tau = mixing.empty() ? 1.0 : mixing[t].tau_mix(n, delta);
    const double f_norm = spectral_norm(truth.f_star[t]);
    const double var = truth.sigma_w[t] * truth.sigma_w[t];
    avg_sq += tau * var * f_norm * f_norm / ext.min;
    if (var > 0.0) {
      worst_f = std::max(worst_f, safe_ratio(var, f_norm * f_norm * ext.min));
      avg_f += safe_ratio(var, div.lambda_f_min * ext.min);
    }
  }
  out.sigma_avg = std::sqrt(avg_sq / static_cast<double>(tasks));
  out.sigma_bar_f_sq = std::max(worst_f, avg_f / static_cast<double>(tasks));
  return out;
}

bool BurninReport::all_pass() const {
  return std::all_of(conditions.begin(), conditions.end(), [](const auto& c) { return c.pass; });
}

double burnin_radius(const MultiTaskProblem& problem) {
  const DiversityStats div = diversity_stats(problem.truth.f_star);
  double max_kappa = 1.0;
  for (const auto& s : problem.truth.sigma_x) {
    const auto ext = symmetric_eigen_extremes(s);
    max_kappa = std::max(max_kappa, safe_ratio(ext.max, ext.min));
  }
  return 0.01 * std::sqrt(safe_ratio(div.lambda_f_min, div.lambda_f_max)) / max_kappa;
}

BurninReport burnin_report(const MultiTaskProblem& problem, const OrthonormalRows& rep,
                           const BurninInputs& in) {
  const auto& dims = problem.dims;
  const double tasks = static_cast<double>(problem.truth.f_star.size());
  const double delta = in.delta;
  const double n_total = static_cast<double>(in.n1 + in.n2);
  const double gamma = problem.subgaussian_gamma.value_or(1.0);
  const double gamma4 = std::pow(gamma, 4);
  const double log_t = std::log(tasks / delta);
  const double dx = static_cast<double>(dims.d_x);

  double tau = 1.0;
  for (const auto& m : in.mixing) tau = std::max(tau, m.tau_mix(n_total, delta));

  const DiversityStats div = diversity_stats(problem.truth.f_star);
  const NoiseStats noise = noise_stats(problem, in.mixing, n_total, delta);

  BurninReport report;
  report.delta = delta;
  auto upper = [&](std::string name, double lhs, double rhs) {
    report.conditions.push_back({std::move(name), lhs, rhs, rhs - lhs, lhs <= rhs});
  };
  auto lower = [&](std::string name, double lhs, double rhs) {
    report.conditions.push_back({std::move(name), lhs, rhs, lhs - rhs, lhs >= rhs});
  };

  upper("initial_distance", subspace_distance(rep, problem.truth.phi_star), burnin_radius(problem));
  lower("n1_samples", static_cast<double>(in.n1),
        tau * std::max(gamma4 * (static_cast<double>(dims.r) + log_t),
                       noise.sigma_bar_f_sq * static_cast<double>(dims.d_y + dims.r) +
                           noise.sigma_bar_f_sq * log_t));
  lower("n2_samples", static_cast<double>(in.n2),
        tau * std::max(gamma4 * (dx + log_t),
                       safe_ratio(noise.sigma_avg * noise.sigma_avg, div.lambda_f_min * tasks) *
                           (dx + log_t) * std::log(dx / delta)));
  lower("n2_whitening", static_cast<double>(in.n2), dx);
  if (in.step_size > 0.0) {
    upper("step_size", in.step_size, 0.956 / div.lambda_f_max);
  }
  return report;
}

MixingDiagnostics mixing_bound_sysid(const MatrixRef& a_closed, const MatrixRef& sigma_forcing,
                                     double gamma_prime, double mu) {
  if (!(mu >= 0.0 && mu < 1.0)) throw Error(ErrorKind::kInvalidArgument, "mu must lie in [0, 1)");
  if (!(gamma_prime > 0.0)) throw Error(ErrorKind::kInvalidArgument, "Gamma' must be positive");
  const double rho = spectral_radius(a_closed);
  if (rho > mu + 1e-12) {
    throw Error(ErrorKind::kUnstable, fmt::format("spectral radius {} exceeds mu = {}", rho, mu));
  }
  const double nuclear = inverse_nuclear_norm(sigma_forcing);
  const Matrix stationary = dlyap(a_closed, sigma_forcing);
  const double gamma = 0.5 * gamma_prime * std::sqrt(stationary.trace() + nuclear / (1.0 - mu * mu));
  return MixingDiagnostics{gamma, mu};
}

double estimate_gelfand_constant(const MatrixRef& a, double mu, int horizon) {
  if (!(mu > 0.0)) throw Error(ErrorKind::kInvalidArgument, "mu must be positive");
  Matrix power = Matrix::Identity(a.rows(), a.cols());
  double best = 1.0;
  double scale = 1.0;
  for (int k = 1; k <= horizon; ++k) {
    power = power * a;
    scale *= mu;
    best = std::max(best, spectral_norm(power) / scale);
  }
  return best;
}

}  // namespace dfw

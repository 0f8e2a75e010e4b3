#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dfw/algorithms.hpp"
#include "dfw/linalg.hpp"
#include "dfw/taskgen.hpp"

namespace dfw {

/// ||rep * truth_perp^T||_2, the sine of the largest principal angle.
double subspace_distance(const OrthonormalRows& rep, const OrthonormalRows& truth);

/// sqrt(1 - sigma_min(rep * truth^T)^2); same quantity by a second route.
double subspace_distance_via_angles(const OrthonormalRows& rep, const OrthonormalRows& truth);

struct DiversityStats {
  double lambda_f_min = 0.0;
  double lambda_f_max = 0.0;
  double kappa_f = 0.0;
};

/// Eigenvalue extremes of (1/T) sum_t F_t^T F_t.
DiversityStats diversity_stats(std::span<const Matrix> f_star);

struct MixingDiagnostics {
  double gamma = 1.0;  // prefactor Gamma in beta(k) <= Gamma mu^k
  double mu = 0.0;

  /// max(log(Gamma N / delta) / log(1 / mu), 1).
  double tau_mix(double n, double delta) const;
};

struct NoiseStats {
  double sigma_avg = 0.0;
  std::vector<double> kappa_x;
  double sigma_bar_f_sq = 0.0;
};

/// Task-averaged noise level. Without mixing diagnostics every task uses tau_mix = 1;
/// otherwise entry t of `mixing` is evaluated at (n, delta).
NoiseStats noise_stats(const MultiTaskProblem& problem,
                       std::span<const MixingDiagnostics> mixing = {}, double n = 1.0,
                       double delta = 0.05);

struct BurninCondition {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // positive when the condition holds
  bool pass = false;
};

struct BurninReport {
  std::vector<BurninCondition> conditions;
  double delta = 0.05;
  /// Order-of-magnitude conditions are evaluated with their hidden constant set to 1.
  std::string convention = "hidden universal constants set to 1";
  bool all_pass() const;
};

struct BurninInputs {
  Eigen::Index n1 = 0;
  Eigen::Index n2 = 0;
  double step_size = 0.0;
  double delta = 0.05;
  std::span<const MixingDiagnostics> mixing = {};
};

BurninReport burnin_report(const MultiTaskProblem& problem, const OrthonormalRows& rep,
                           const BurninInputs& inputs);

/// Burn-in radius on the initial distance: (1/100) sqrt(lF_min/lF_max) / max_t kappa(Sigma_x).
double burnin_radius(const MultiTaskProblem& problem);

/// Gamma = (Gamma'/2) sqrt(tr(S) + ||Sigma^{-1}||_* / (1 - mu^2)), S = dlyap(A, Sigma).
MixingDiagnostics mixing_bound_sysid(const MatrixRef& a_closed, const MatrixRef& sigma_forcing,
                                     double gamma_prime, double mu);

/// max_{k <= horizon} ||A^k|| / mu^k.
double estimate_gelfand_constant(const MatrixRef& a, double mu, int horizon = 200);

}  // namespace dfw

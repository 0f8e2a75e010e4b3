#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "dfw/linalg.hpp"

namespace dfw {

enum class Setting { kRegression, kSysId, kImitation };

std::string_view to_string(Setting s);
Setting setting_from_string(std::string_view s);

// Covariate laws. Each produces covariates x_i and labels y_i = M x_i + w_i.

struct IidGaussian {
  Matrix sigma_x;
};

/// x_{i+1} = A x_i + B u_i + w_i with u_i ~ N(0, sigma_u^2 I), w_i ~ N(0, sigma_w_proc).
/// Covariate z_i = [x_i; u_i], label x_{i+1}.
struct LinearSystem {
  Matrix a;
  Matrix b;
  Matrix sigma_w_proc;
  double sigma_u = 1.0;
  Matrix sigma0;  // stationary state covariance
};

/// Expert rollouts in observation space:
/// y_{i+1} = A y_i + B u_i + w_i, u_i = K y_i + z_i. Covariate y_i, label u_i.
struct ExpertClosedLoop {
  Matrix a;
  Matrix b;
  Matrix k;
  Matrix sigma_z;
  Matrix sigma_w_obs;
  Matrix sigma0;
};

using CovariateLaw = std::variant<IidGaussian, LinearSystem, ExpertClosedLoop>;

struct GroundTruth {
  OrthonormalRows phi_star;
  std::vector<Matrix> f_star;   // T x (d_y x r)
  std::vector<Matrix> sigma_x;  // marginal covariate covariance per task
  std::vector<double> sigma_w;  // label-noise scale per task
};

/// A task that is not part of training, used for fine-tuning experiments.
struct HeldOutTask {
  Matrix f_star;
  Matrix sigma_x;
  double sigma_w = 0.0;
  CovariateLaw law;
};

struct Dims {
  Eigen::Index d_x = 0;  // covariate dimension
  Eigen::Index d_y = 0;  // label dimension
  Eigen::Index r = 0;
  Eigen::Index tasks = 0;
};

struct MultiTaskProblem {
  Setting setting = Setting::kRegression;
  GroundTruth truth;
  std::vector<CovariateLaw> laws{};
  Dims dims{};
  std::optional<double> subgaussian_gamma{};
  std::optional<HeldOutTask> holdout{};
  std::uint64_t seed = 0;

  /// M*_t = F*_t Phi*.
  Matrix operator_star(std::size_t t) const { return truth.f_star.at(t) * truth.phi_star.mat(); }

  /// The same problem restricted to its first `tasks` tasks.
  MultiTaskProblem first_tasks(std::size_t tasks) const;

  /// Throws kDimensionMismatch if any stored shape disagrees with `dims`.
  void validate() const;
};

OrthonormalRows gen_shared_representation(Eigen::Index d_x, Eigen::Index r, std::uint64_t seed);

/// F_t = F0 * random_rotation(r, rotation_scale, subseed(t)).
std::vector<Matrix> gen_task_weights(Eigen::Index d_y, Eigen::Index r, std::size_t tasks,
                                     double rotation_scale, std::uint64_t seed);

/// d * S / tr(S) with S = (U + U^T)/2, U = diag_offset * I + offdiag_scale * V,
/// V_ij ~ Unif(0, 1).
Matrix gen_covariance(Eigen::Index d, double diag_offset, std::uint64_t seed,
                      double offdiag_scale = 1.0);

MultiTaskProblem gen_regression_problem(Eigen::Index d_x, Eigen::Index d_y, Eigen::Index r,
                                        std::size_t tasks, double noise_std,
                                        double rotation_scale, std::uint64_t seed);

struct SysIdOptions {
  double rotation_scale = 0.01;
  double proc_noise_offdiag = 2.0;
  double max_spectral_radius = 0.95;
};

MultiTaskProblem gen_sysid_problem(Eigen::Index d_state, Eigen::Index d_u, Eigen::Index r,
                                   std::size_t tasks, double sigma_u, double proc_noise_offset,
                                   std::uint64_t seed, const SysIdOptions& opts = {});

/// sigma_u^2 B B^T + Sigma_w pushed through the Lyapunov equation of A.
Matrix stationary_state_covariance(const MatrixRef& a, const MatrixRef& b, double sigma_u,
                                   const MatrixRef& sigma_w);

struct ImitationOptions {
  double obs_noise_offset = 5.0;
  double obs_noise_offdiag = 1.0;
  double obs_noise_scale = 1.0;
  double input_cost = 0.25;
};

/// `cost_alphas` holds tasks + 1 entries; the last expert becomes the held-out task.
MultiTaskProblem gen_imitation_problem(Eigen::Index n_x, Eigen::Index n_u, Eigen::Index obs_dim,
                                       std::size_t tasks, std::span<const double> cost_alphas,
                                       std::uint64_t seed, const ImitationOptions& opts = {});

/// `count` points evenly spaced in log10 between 10^lo and 10^hi.
std::vector<double> logspace(double lo, double hi, std::size_t count);

}  // namespace dfw

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dfw/datasim.hpp"
#include "dfw/linalg.hpp"
#include "dfw/taskgen.hpp"

namespace dfw {

enum class Variant { kDfw, kVanillaAmd };

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view s);

struct AlgoConfig {
  double step_size = 7.5e-3;
  /// Replace `step_size` by 0.956 / lambda_F_max computed from the ground truth.
  bool oracle_step_size = false;
  double split_fraction = 0.5;
  SplitMode split_mode = SplitMode::kContiguous;
  Variant variant = Variant::kDfw;
  int iterations = 100;
  Eigen::Index batch_size = 100;
  /// Per-round batch sizes; overrides `iterations` and `batch_size` when set.
  std::vector<Eigen::Index> batch_schedule;
  /// When N2 < d_cov, whiten with (S + lambda I), lambda = 1e-6 tr(S)/d, instead of failing.
  bool ridge_fallback = false;

  bool whitening() const { return variant == Variant::kDfw; }
  bool debias() const { return variant == Variant::kDfw; }
  void validate() const;
};

struct IterationRecord {
  int iter = 0;
  double subspace_distance = 0.0;
  double contraction_factor = 0.0;
  double orthogonalization_inverse_norm = 0.0;
  std::optional<double> noise_term_norm;
  std::vector<double> weight_norms;
  double wall_ms = 0.0;
};

/// Ground truth needed for diagnostics only; the update itself never reads it.
struct TruthView {
  const OrthonormalRows* phi_star = nullptr;
};

struct StepResult {
  OrthonormalRows rep_next;
  Matrix r;
  Matrix averaged;  // pre-orthonormalization average, equals r * rep_next
  std::vector<Matrix> weights;
  IterationRecord record;
};

/// argmin_F sum ||y_i - F Phi x_i||^2 = Y^T Z (Z^T Z)^{-1}, Z = X Phi^T.
Matrix least_squares_weights(const MatrixRef& y, const MatrixRef& x, const OrthonormalRows& rep);

/// Gradient of (1/2N) sum_i ||y_i - F Phi x_i||^2 with respect to Phi:
/// F^T (F Phi S - Y^T X / N), S = X^T X / N.
Matrix representation_gradient(const MatrixRef& y, const MatrixRef& x, const MatrixRef& f,
                               const MatrixRef& rep);

StepResult dfw_step(const TrajectoryBatch& batch, const OrthonormalRows& rep, double step_size,
                    const TruthView& truth = {}, bool ridge_fallback = false);

StepResult amd_step(const TrajectoryBatch& batch, const OrthonormalRows& rep, double step_size,
                    const TruthView& truth = {});

enum class InitMode { kRandomRotationOfTruth, kRandom };

OrthonormalRows init_representation(const MultiTaskProblem& problem, InitMode mode, double gamma,
                                    std::uint64_t seed);

/// 0.956 / lambda_F_max of the ground-truth task weights.
double oracle_step_size(const MultiTaskProblem& problem);

struct TrainingResult {
  std::vector<IterationRecord> records;
  OrthonormalRows final_rep;
};

/// Fresh batch every round; round k draws from seed stream (seed, k).
TrainingResult run_training(const MultiTaskProblem& problem, const OrthonormalRows& init,
                            const AlgoConfig& config, std::uint64_t seed);

struct ErmSchedule {
  int rounds = 0;
  std::vector<long long> batch_sizes;
  double guaranteed_bound = 0.0;  // tau * ((1 + rho)/2)^K
  double simulated_final = 0.0;   // d_K of d_{k+1} = rho d_k + C / M_k
  double lemma_bound = 0.0;       // tau * sqrt(2C/M (2/(1-rho))^3)
};

ErmSchedule erm_schedule(long long total_samples, double contraction, double noise_constant,
                         double initial_distance);

struct TransferResult {
  Matrix weights;
  std::optional<double> param_error;  // ||F Phi - M*||_F
};

TransferResult transfer_finetune(const OrthonormalRows& rep, const TaskData& data,
                                 const std::optional<Matrix>& m_star = std::nullopt);

}  // namespace dfw

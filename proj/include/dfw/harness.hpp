#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dfw/algorithms.hpp"
#include "dfw/serialize.hpp"
#include "dfw/taskgen.hpp"

namespace dfw {

struct VariantSpec {
  std::string name;
  Variant algorithm = Variant::kDfw;
  std::size_t tasks = 1;
  std::optional<double> step_size;  // falls back to ExperimentConfig::step_size
  bool oracle_step_size = false;
};

/// Parses "DFW-T25" / "AMD-T1" shorthand.
VariantSpec parse_variant_name(const std::string& name);

struct ErmScheduleSpec {
  long long total_samples = 0;
  double contraction = 0.5;
  double noise_constant = 1.0;
  double initial_distance = 1.0;
};

struct TransferSpec {
  std::vector<Eigen::Index> n_prime;
  std::size_t trials = 20;
  std::string variant;                     // whose trained representations to load
  std::string representation = "trained";  // or "truth"
};

struct ExperimentConfig {
  Setting setting = Setting::kRegression;
  // regression: d_x, d_y; sysid: d_x is the state dimension, plus d_u;
  // imitation: n_x, n_u, obs_dim.
  Eigen::Index d_x = 50;
  Eigen::Index d_y = 50;
  Eigen::Index r = 7;
  Eigen::Index d_u = 2;
  Eigen::Index n_x = 4;
  Eigen::Index n_u = 4;
  Eigen::Index obs_dim = 25;
  std::size_t tasks = 25;
  Eigen::Index batch_size = 100;
  int iterations = 200;
  double step_size = 7.5e-3;
  std::vector<VariantSpec> variants;
  std::size_t trials = 10;
  std::uint64_t master_seed = 0;
  double split_fraction = 0.5;
  SplitMode split_mode = SplitMode::kContiguous;
  std::filesystem::path output_dir = "out";
  double noise_std = 1.0;
  double rotation_scale = 0.01;
  double init_gamma = 1.0;
  InitMode init_mode = InitMode::kRandomRotationOfTruth;
  double sigma_u = 1.0;
  double proc_noise_offset = 5.0;
  std::vector<double> cost_alphas;  // empty: logspace(0, 3, tasks + 1)
  bool ridge_fallback = false;
  bool record_wall_time = false;
  bool save_problems = false;
  std::optional<ErmScheduleSpec> erm;
  std::optional<TransferSpec> transfer;

  void validate() const;
};

ExperimentConfig config_from_json(const Json& j);
Json config_to_json(const ExperimentConfig& c);

/// Builds the ground-truth problem of trial `trial`; shared by all variants.
MultiTaskProblem make_problem(const ExperimentConfig& c, std::size_t trial);

std::uint64_t problem_seed(const ExperimentConfig& c, std::size_t trial);

struct VariantCurve {
  std::string name;
  std::vector<double> mean;
  std::vector<double> lower;
  std::vector<double> upper;
};

struct ExperimentSummary {
  std::vector<VariantCurve> curves;
  std::vector<std::vector<TrainingResult>> results;  // [variant][trial]
  std::vector<std::uint64_t> problem_hashes;
};

/// Trains every variant on every trial and writes CSV + summary.json into
/// `config.output_dir`. Worker count comes from DFW_LAB_THREADS (default 1).
ExperimentSummary run_experiment(const ExperimentConfig& config);

struct TransferRow {
  Eigen::Index n_prime = 0;
  double mean_sq_error = 0.0;
  double stderr_sq_error = 0.0;
  std::size_t trials = 0;
};

std::vector<TransferRow> run_transfer_eval(const ExperimentConfig& config);

/// The three reference experiment configurations.
std::vector<ExperimentConfig> presets();

/// Value of DFW_LAB_THREADS, or 1 when unset or invalid.
unsigned worker_threads();

/// Mean and 95% band (mean +- 1.96 standard error) across trials.
VariantCurve aggregate_curve(const std::string& name, const std::vector<TrainingResult>& trials);

}  // namespace dfw

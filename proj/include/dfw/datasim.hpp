#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "dfw/linalg.hpp"
#include "dfw/taskgen.hpp"

namespace dfw {

enum class SplitMode { kContiguous, kInterleaved };

/// Disjoint index sets: weights are fit on `first`, gradients on `second`.
struct Split {
  std::vector<Eigen::Index> first;
  std::vector<Eigen::Index> second;
};

/// |first| = ceil(fraction * n). Throws kBadSplit if either side is empty.
Split make_split(Eigen::Index n, double fraction, SplitMode mode = SplitMode::kContiguous);

struct TaskData {
  Matrix x;  // n x d_cov
  Matrix y;  // n x d_lab
  std::optional<Matrix> noise;  // label noise, present for simulated data
};

struct TrajectoryBatch {
  std::vector<TaskData> tasks;
  Split split;

  Eigen::Index size() const { return tasks.empty() ? 0 : tasks.front().x.rows(); }
};

struct SampleOptions {
  SplitMode split_mode = SplitMode::kContiguous;
};

TrajectoryBatch sample_batch(const MultiTaskProblem& problem, Eigen::Index n, double split_fraction,
                             std::uint64_t seed, const SampleOptions& opts = {});

/// n samples from a single law with true operator `m_star` and label-noise scale
/// `sigma_w` (used by iid laws only; dynamical laws carry their own noise).
TaskData sample_task(const CovariateLaw& law, const MatrixRef& m_star, double sigma_w, Eigen::Index n,
                     std::uint64_t seed);

/// (1/N) X^T X.
Matrix empirical_covariance(const MatrixRef& x);

Matrix select_rows(const MatrixRef& m, const std::vector<Eigen::Index>& rows);

/// One CSV per task: index, x_0..x_{d-1}, y_0..y_{k-1}.
void export_batch_csv(const TrajectoryBatch& batch, const std::filesystem::path& dir,
                      const std::string& prefix = "task");

}  // namespace dfw

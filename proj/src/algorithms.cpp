#include "dfw/algorithms.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "dfw/metrics.hpp"
#include "dfw/rng.hpp"

namespace dfw {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kDfw: return "dfw";
    case Variant::kVanillaAmd: return "amd";
  }
  return "unknown";
}

Variant variant_from_string(std::string_view s) {
  if (s == "dfw" || s == "DFW") return Variant::kDfw;
  if (s == "amd" || s == "AMD") return Variant::kVanillaAmd;
  throw Error(ErrorKind::kInvalidArgument, "unknown algorithm '" + std::string(s) + "'");
}

void AlgoConfig::validate() const {
  if (!oracle_step_size && !(step_size > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "step size must be positive");
  }
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "split fraction must lie in (0, 1)");
  }
  if (batch_schedule.empty()) {
    if (iterations < 1) throw Error(ErrorKind::kInvalidArgument, "need at least one iteration");
    if (batch_size < 2) throw Error(ErrorKind::kInvalidArgument, "batch size must be >= 2");
  } else {
    for (auto n : batch_schedule) {
      if (n < 2) throw Error(ErrorKind::kInvalidArgument, "scheduled batch size must be >= 2");
    }
  }
}

Matrix least_squares_weights(const MatrixRef& y, const MatrixRef& x, const OrthonormalRows& rep) {
  if (x.rows() != y.rows()) throw Error(ErrorKind::kDimensionMismatch, "X and Y row counts differ");
  if (x.cols() != rep.dim()) throw Error(ErrorKind::kDimensionMismatch, "X width differs from representation");
  const Matrix z = x * rep.mat().transpose();
  const Matrix gram = z.transpose() * z;
  const auto ext = symmetric_eigen_extremes(gram);
  if (!(ext.max > 0.0) || !(ext.min > 1e-12 * ext.max)) {
    throw Error(ErrorKind::kSingularGram,
                fmt::format("feature gram is singular ({} samples, rank {})", x.rows(), rep.rank()));
  }
  return gram.ldlt().solve(z.transpose() * y).transpose();
}

Matrix representation_gradient(const MatrixRef& y, const MatrixRef& x, const MatrixRef& f,
                               const MatrixRef& rep) {
  const double n = static_cast<double>(x.rows());
  const Matrix cov = x.transpose() * x / n;
  const Matrix cross = y.transpose() * x / n;
  return f.transpose() * (f * rep * cov - cross);
}

namespace {

struct Accumulator {
  Matrix sum;
  Matrix weight_gram;
  Matrix noise;
  bool have_noise = true;
  std::vector<Matrix> weights;
  std::vector<double> weight_norms;
};

StepResult finish_step(Accumulator acc, std::size_t tasks, const OrthonormalRows& rep, double step_size,
                       const TruthView& truth) {
  const double inv_t = 1.0 / static_cast<double>(tasks);
  Matrix averaged = acc.sum * inv_t;
  RowFactorization fact = orthonormalize_rows(averaged);

  IterationRecord rec;
  const Eigen::Index r = rep.rank();
  rec.contraction_factor =
      spectral_norm(Matrix::Identity(r, r) - step_size * inv_t * acc.weight_gram);
  rec.orthogonalization_inverse_norm =
      spectral_norm(fact.r.triangularView<Eigen::Lower>().solve(Matrix::Identity(r, r)));
  if (acc.have_noise) rec.noise_term_norm = spectral_norm(acc.noise * inv_t);
  rec.weight_norms = std::move(acc.weight_norms);
  if (truth.phi_star != nullptr) rec.subspace_distance = subspace_distance(fact.q, *truth.phi_star);
  return StepResult{std::move(fact.q), std::move(fact.r), std::move(averaged), std::move(acc.weights),
                    std::move(rec)};
}

Accumulator make_accumulator(const OrthonormalRows& rep, std::size_t tasks) {
  Accumulator acc;
  acc.sum = Matrix::Zero(rep.rank(), rep.dim());
  acc.weight_gram = Matrix::Zero(rep.rank(), rep.rank());
  acc.noise = Matrix::Zero(rep.rank(), rep.dim());
  acc.weights.reserve(tasks);
  acc.weight_norms.reserve(tasks);
  return acc;
}

void check_batch(const TrajectoryBatch& batch, const OrthonormalRows& rep) {
  if (batch.tasks.empty()) throw Error(ErrorKind::kInvalidArgument, "batch has no tasks");
  for (const auto& task : batch.tasks) {
    if (task.x.cols() != rep.dim()) {
      throw Error(ErrorKind::kDimensionMismatch, "covariate width differs from representation");
    }
  }
}

}  // namespace

StepResult dfw_step(const TrajectoryBatch& batch, const OrthonormalRows& rep, double step_size,
                    const TruthView& truth, bool ridge_fallback) {
  check_batch(batch, rep);
  if (batch.split.first.empty() || batch.split.second.empty()) {
    throw Error(ErrorKind::kBadSplit, "both halves of the split must be nonempty");
  }
  const std::size_t tasks = batch.tasks.size();
  const Eigen::Index d = rep.dim();
  Accumulator acc = make_accumulator(rep, tasks);

  for (std::size_t t = 0; t < tasks; ++t) {
    const TaskData& task = batch.tasks[t];
    try {
      const Matrix x1 = select_rows(task.x, batch.split.first);
      const Matrix y1 = select_rows(task.y, batch.split.first);
      const Matrix x2 = select_rows(task.x, batch.split.second);
      const Matrix y2 = select_rows(task.y, batch.split.second);
      const double n2 = static_cast<double>(x2.rows());

      Matrix f = least_squares_weights(y1, x1, rep);

      Matrix cov2 = empirical_covariance(x2);
      const bool short_batch = x2.rows() < d;
      if (short_batch && !ridge_fallback) {
        throw Error(ErrorKind::kSingularCovariance,
                    fmt::format("gradient half has {} samples but covariates have dimension {}",
                                x2.rows(), d));
      }
      if (short_batch) {
        cov2.diagonal().array() += 1e-6 * cov2.trace() / static_cast<double>(d);
      }
      const auto ext = symmetric_eigen_extremes(cov2);
      if (!(ext.max > 0.0) || !(ext.min > 1e-12 * ext.max)) {
        throw Error(ErrorKind::kSingularCovariance, "sample covariance of the gradient half is singular");
      }
      const Eigen::LDLT<Matrix> whiten(cov2);

      const Matrix grad = representation_gradient(y2, x2, f, rep.mat());
      acc.sum += rep.mat() - step_size * whiten.solve(grad.transpose()).transpose();
      acc.weight_gram += f.transpose() * f;
      if (task.noise) {
        const Matrix w2 = select_rows(*task.noise, batch.split.second);
        acc.noise += whiten.solve(x2.transpose() * w2 / n2 * f).transpose();
      } else {
        acc.have_noise = false;
      }
      acc.weight_norms.push_back(spectral_norm(f));
      acc.weights.push_back(std::move(f));
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("task {}: {}", t, e.detail()));
    }
  }
  return finish_step(std::move(acc), tasks, rep, step_size, truth);
}

StepResult amd_step(const TrajectoryBatch& batch, const OrthonormalRows& rep, double step_size,
                    const TruthView& truth) {
  check_batch(batch, rep);
  const std::size_t tasks = batch.tasks.size();
  Accumulator acc = make_accumulator(rep, tasks);
  for (std::size_t t = 0; t < tasks; ++t) {
    const TaskData& task = batch.tasks[t];
    try {
      Matrix f = least_squares_weights(task.y, task.x, rep);
      const Matrix grad = representation_gradient(task.y, task.x, f, rep.mat());
      acc.sum += rep.mat() - step_size * grad;
      acc.weight_gram += f.transpose() * f;
      if (task.noise) {
        acc.noise += f.transpose() * task.noise->transpose() * task.x / static_cast<double>(task.x.rows());
      } else {
        acc.have_noise = false;
      }
      acc.weight_norms.push_back(spectral_norm(f));
      acc.weights.push_back(std::move(f));
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("task {}: {}", t, e.detail()));
    }
  }
  return finish_step(std::move(acc), tasks, rep, step_size, truth);
}

OrthonormalRows init_representation(const MultiTaskProblem& problem, InitMode mode, double gamma,
                                    std::uint64_t seed) {
  const auto& phi = problem.truth.phi_star;
  if (mode == InitMode::kRandom) return gen_shared_representation(phi.dim(), phi.rank(), seed);
  return OrthonormalRows(phi.mat() * random_rotation(phi.dim(), gamma, seed));
}

double oracle_step_size(const MultiTaskProblem& problem) {
  return 0.956 / diversity_stats(problem.truth.f_star).lambda_f_max;
}

TrainingResult run_training(const MultiTaskProblem& problem, const OrthonormalRows& init,
                            const AlgoConfig& config, std::uint64_t seed) {
  config.validate();
  const double step = config.oracle_step_size ? oracle_step_size(problem) : config.step_size;
  const int rounds = config.batch_schedule.empty() ? config.iterations
                                                   : static_cast<int>(config.batch_schedule.size());
  const TruthView truth{&problem.truth.phi_star};
  const Rng root(seed);

  TrainingResult out{{}, init};
  out.records.reserve(static_cast<std::size_t>(rounds));
  for (int k = 0; k < rounds; ++k) {
    const auto n = config.batch_schedule.empty() ? config.batch_size
                                                 : config.batch_schedule[static_cast<std::size_t>(k)];
    const auto start = std::chrono::steady_clock::now();
    try {
      const TrajectoryBatch batch = sample_batch(problem, n, config.split_fraction,
                                                 root.split(static_cast<std::uint64_t>(k)).key(),
                                                 SampleOptions{config.split_mode});
      StepResult res = config.variant == Variant::kDfw
                           ? dfw_step(batch, out.final_rep, step, truth, config.ridge_fallback)
                           : amd_step(batch, out.final_rep, step, truth);
      res.record.iter = k + 1;
      res.record.wall_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      out.records.push_back(std::move(res.record));
      out.final_rep = std::move(res.rep_next);
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("round {}: {}", k + 1, e.detail()));
    }
  }
  return out;
}

ErmSchedule erm_schedule(long long total_samples, double contraction, double noise_constant,
                         double initial_distance) {
  if (total_samples < 1) throw Error(ErrorKind::kInvalidArgument, "total samples must be >= 1");
  if (!(contraction > 0.0 && contraction < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "contraction must lie in (0, 1)");
  }
  if (!(noise_constant > 0.0) || !(initial_distance > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "noise constant and initial distance must be positive");
  }
  const double half_gap = (1.0 + contraction) / 2.0;
  ErmSchedule s;
  long long used = 0;
  double d = initial_distance;
  while (true) {
    const double need = std::ceil(2.0 * noise_constant / ((1.0 - contraction) * d));
    if (!(need <= static_cast<double>(total_samples - used))) break;
    const auto block = static_cast<long long>(need);
    s.batch_sizes.push_back(block);
    used += block;
    d *= half_gap;
  }
  if (s.batch_sizes.empty()) {
    throw Error(ErrorKind::kInfeasible, "the first block alone exceeds the sample budget");
  }
  s.rounds = static_cast<int>(s.batch_sizes.size());
  s.guaranteed_bound = initial_distance * std::pow(half_gap, s.rounds);
  double sim = initial_distance;
  for (auto m : s.batch_sizes) sim = contraction * sim + noise_constant / static_cast<double>(m);
  s.simulated_final = sim;
  s.lemma_bound = initial_distance * std::sqrt(2.0 * noise_constant / static_cast<double>(total_samples) *
                                               std::pow(2.0 / (1.0 - contraction), 3));
  return s;
}

TransferResult transfer_finetune(const OrthonormalRows& rep, const TaskData& data,
                                 const std::optional<Matrix>& m_star) {
  TransferResult out{least_squares_weights(data.y, data.x, rep), std::nullopt};
  if (m_star) {
    if (m_star->rows() != data.y.cols() || m_star->cols() != rep.dim()) {
      throw Error(ErrorKind::kDimensionMismatch, "true operator has the wrong shape");
    }
    out.param_error = (out.weights * rep.mat() - *m_star).norm();
  }
  return out;
}

}  // namespace dfw

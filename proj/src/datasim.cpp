#include "dfw/datasim.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include <fmt/format.h>

#include "dfw/rng.hpp"

namespace dfw {

namespace {

Vector normal_vector(Rng& rng, Eigen::Index d) {
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = rng.normal();
  return v;
}

TaskData sample_iid(const IidGaussian& law, const MatrixRef& m_star, double sigma_w, Eigen::Index n,
                    Rng rng) {
  const Matrix chol = cholesky_lower(law.sigma_x);
  const Eigen::Index d = chol.rows();
  const Eigen::Index k = m_star.rows();
  TaskData out{Matrix(n, d), Matrix(n, k), Matrix(n, k)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.x.row(i) = (chol * normal_vector(rng, d)).transpose();
    out.noise->row(i) = sigma_w * normal_vector(rng, k).transpose();
  }
  out.y = out.x * m_star.transpose() + *out.noise;
  return out;
}

TaskData sample_linear_system(const LinearSystem& law, Eigen::Index n, Rng rng) {
  const Eigen::Index ds = law.a.rows();
  const Eigen::Index du = law.b.cols();
  const Matrix chol0 = cholesky_lower(law.sigma0);
  const Matrix chol_w = cholesky_lower(law.sigma_w_proc);
  TaskData out{Matrix(n, ds + du), Matrix(n, ds), Matrix(n, ds)};
  Vector state = chol0 * normal_vector(rng, ds);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector input = law.sigma_u * normal_vector(rng, du);
    const Vector w = chol_w * normal_vector(rng, ds);
    const Vector next = law.a * state + law.b * input + w;
    out.x.row(i).head(ds) = state.transpose();
    out.x.row(i).tail(du) = input.transpose();
    out.y.row(i) = next.transpose();
    out.noise->row(i) = w.transpose();
    state = next;
  }
  return out;
}

TaskData sample_expert(const ExpertClosedLoop& law, Eigen::Index n, Rng rng) {
  const Eigen::Index dy = law.a.rows();
  const Eigen::Index du = law.b.cols();
  const Matrix chol0 = cholesky_lower(law.sigma0);
  const Matrix chol_z = cholesky_lower(law.sigma_z);
  const Matrix chol_w = cholesky_lower(law.sigma_w_obs);
  TaskData out{Matrix(n, dy), Matrix(n, du), Matrix(n, du)};
  Vector obs = chol0 * normal_vector(rng, dy);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector z = chol_z * normal_vector(rng, du);
    const Vector input = law.k * obs + z;
    const Vector w = chol_w * normal_vector(rng, dy);
    out.x.row(i) = obs.transpose();
    out.y.row(i) = input.transpose();
    out.noise->row(i) = z.transpose();
    obs = law.a * obs + law.b * input + w;
  }
  return out;
}

}  // namespace

Split make_split(Eigen::Index n, double fraction, SplitMode mode) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorKind::kBadSplit, "split fraction must lie in (0, 1)");
  }
  const auto n_first = static_cast<Eigen::Index>(std::ceil(fraction * static_cast<double>(n)));
  if (n_first < 1 || n_first >= n) {
    throw Error(ErrorKind::kBadSplit,
                fmt::format("split of {} samples at fraction {} leaves an empty part", n, fraction));
  }
  Split s;
  if (mode == SplitMode::kContiguous) {
    for (Eigen::Index i = 0; i < n; ++i) (i < n_first ? s.first : s.second).push_back(i);
    return s;
  }
  // Spread the first part evenly: index i joins it when ceil(f*(i+1)) steps up.
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lo = std::ceil(fraction * static_cast<double>(i));
    const double hi = std::ceil(fraction * static_cast<double>(i + 1));
    (hi > lo ? s.first : s.second).push_back(i);
  }
  return s;
}

TaskData sample_task(const CovariateLaw& law, const MatrixRef& m_star, double sigma_w, Eigen::Index n,
                     std::uint64_t seed) {
  Rng rng(seed);
  return std::visit(
      [&](const auto& l) -> TaskData {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, IidGaussian>) {
          return sample_iid(l, m_star, sigma_w, n, rng);
        } else if constexpr (std::is_same_v<L, LinearSystem>) {
          return sample_linear_system(l, n, rng);
        } else {
          return sample_expert(l, n, rng);
        }
      },
      law);
}

TrajectoryBatch sample_batch(const MultiTaskProblem& problem, Eigen::Index n, double split_fraction,
                             std::uint64_t seed, const SampleOptions& opts) {
  if (n < 2) throw Error(ErrorKind::kBadSplit, "batch needs at least two samples");
  TrajectoryBatch batch{{}, make_split(n, split_fraction, opts.split_mode)};
  const Rng root(seed);
  batch.tasks.reserve(problem.laws.size());
  for (std::size_t t = 0; t < problem.laws.size(); ++t) {
    batch.tasks.push_back(sample_task(problem.laws[t], problem.operator_star(t), problem.truth.sigma_w[t],
                                      n, root.split(static_cast<std::uint64_t>(t)).key()));
  }
  return batch;
}

Matrix empirical_covariance(const MatrixRef& x) {
  if (x.rows() < 1) throw Error(ErrorKind::kInvalidArgument, "empirical covariance needs samples");
  Matrix c = x.transpose() * x / static_cast<double>(x.rows());
  return 0.5 * (c + c.transpose());
}

Matrix select_rows(const MatrixRef& m, const std::vector<Eigen::Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

void export_batch_csv(const TrajectoryBatch& batch, const std::filesystem::path& dir,
                      const std::string& prefix) {
  std::filesystem::create_directories(dir);
  for (std::size_t t = 0; t < batch.tasks.size(); ++t) {
    const auto& task = batch.tasks[t];
    const auto path = dir / fmt::format("{}{}.csv", prefix, t);
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
    out << "index";
    for (Eigen::Index j = 0; j < task.x.cols(); ++j) out << ",x" << j;
    for (Eigen::Index j = 0; j < task.y.cols(); ++j) out << ",y" << j;
    out << '\n';
    for (Eigen::Index i = 0; i < task.x.rows(); ++i) {
      out << i;
      for (Eigen::Index j = 0; j < task.x.cols(); ++j) out << fmt::format(",{:.17g}", task.x(i, j));
      for (Eigen::Index j = 0; j < task.y.cols(); ++j) out << fmt::format(",{:.17g}", task.y(i, j));
      out << '\n';
    }
  }
}

}  // namespace dfw

#include "dfw/taskgen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dfw/rng.hpp"

namespace dfw {

namespace {

std::uint64_t subseed(std::uint64_t seed, std::string_view tag) { return Rng(seed).split(tag).key(); }

std::uint64_t subseed(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
  return Rng(seed).split(tag).split(index).key();
}

}  // namespace

std::string_view to_string(Setting s) {
  switch (s) {
    case Setting::kRegression: return "regression";
    case Setting::kSysId: return "sysid";
    case Setting::kImitation: return "imitation";
  }
  return "unknown";
}

Setting setting_from_string(std::string_view s) {
  if (s == "regression") return Setting::kRegression;
  if (s == "sysid") return Setting::kSysId;
  if (s == "imitation") return Setting::kImitation;
  throw Error(ErrorKind::kInvalidArgument, "unknown setting '" + std::string(s) + "'");
}

MultiTaskProblem MultiTaskProblem::first_tasks(std::size_t tasks) const {
  if (tasks < 1 || tasks > laws.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "cannot take " + std::to_string(tasks) + " of " + std::to_string(laws.size()) + " tasks");
  }
  MultiTaskProblem out = *this;
  out.truth.f_star.resize(tasks);
  out.truth.sigma_x.resize(tasks);
  out.truth.sigma_w.resize(tasks);
  out.laws.resize(tasks);
  out.dims.tasks = static_cast<Eigen::Index>(tasks);
  return out;
}

void MultiTaskProblem::validate() const {
  const auto t = static_cast<std::size_t>(dims.tasks);
  if (truth.f_star.size() != t || truth.sigma_x.size() != t || truth.sigma_w.size() != t ||
      laws.size() != t) {
    throw Error(ErrorKind::kDimensionMismatch, "per-task lists disagree with task count");
  }
  if (truth.phi_star.rank() != dims.r || truth.phi_star.dim() != dims.d_x) {
    throw Error(ErrorKind::kDimensionMismatch, "representation shape disagrees with dims");
  }
  for (std::size_t i = 0; i < t; ++i) {
    if (truth.f_star[i].rows() != dims.d_y || truth.f_star[i].cols() != dims.r) {
      throw Error(ErrorKind::kDimensionMismatch, "task weight " + std::to_string(i) + " has wrong shape");
    }
    if (truth.sigma_x[i].rows() != dims.d_x || truth.sigma_x[i].cols() != dims.d_x) {
      throw Error(ErrorKind::kDimensionMismatch, "covariance " + std::to_string(i) + " has wrong shape");
    }
  }
}

OrthonormalRows gen_shared_representation(Eigen::Index d_x, Eigen::Index r, std::uint64_t seed) {
  if (r < 1 || r > d_x) {
    throw Error(ErrorKind::kInvalidArgument, "representation needs 1 <= r <= d_x");
  }
  return orthonormalize_rows(gaussian_matrix(r, d_x, seed)).q;
}

std::vector<Matrix> gen_task_weights(Eigen::Index d_y, Eigen::Index r, std::size_t tasks,
                                     double rotation_scale, std::uint64_t seed) {
  if (tasks < 1) throw Error(ErrorKind::kInvalidArgument, "need at least one task");
  if (d_y < 1 || r < 1) throw Error(ErrorKind::kInvalidArgument, "weight dimensions must be positive");
  const Matrix f0 = gaussian_matrix(d_y, r, subseed(seed, "F0"));
  std::vector<Matrix> out;
  out.reserve(tasks);
  for (std::size_t t = 0; t < tasks; ++t) {
    out.push_back(f0 * random_rotation(r, rotation_scale, subseed(seed, "rotation", t)));
  }
  return out;
}

Matrix gen_covariance(Eigen::Index d, double diag_offset, std::uint64_t seed, double offdiag_scale) {
  if (d < 1) throw Error(ErrorKind::kInvalidArgument, "covariance dimension must be positive");
  if (!(diag_offset > 1.0)) throw Error(ErrorKind::kInvalidArgument, "diag_offset must exceed 1");
  Rng rng(seed);
  Matrix u(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) u(i, j) = offdiag_scale * rng.uniform();
  }
  u.diagonal().array() += diag_offset;
  const Matrix sym = 0.5 * (u + u.transpose());
  Matrix sigma = static_cast<double>(d) * sym / sym.trace();
  if (!(symmetric_eigen_extremes(sigma).min > 0.0)) {
    throw Error(ErrorKind::kNotPositiveDefinite, "generated covariance is not positive definite");
  }
  return sigma;
}

MultiTaskProblem gen_regression_problem(Eigen::Index d_x, Eigen::Index d_y, Eigen::Index r,
                                        std::size_t tasks, double noise_std,
                                        double rotation_scale, std::uint64_t seed) {
  if (!(noise_std >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "noise_std must be >= 0");
  MultiTaskProblem p{.setting = Setting::kRegression,
                     .truth = {gen_shared_representation(d_x, r, subseed(seed, "phi")), {}, {}, {}},
                     .dims = {d_x, d_y, r, static_cast<Eigen::Index>(tasks)},
                     .seed = seed};
  auto weights = gen_task_weights(d_y, r, tasks + 1, rotation_scale, subseed(seed, "weights"));
  const Matrix sigma_x = gen_covariance(d_x, 5.0, subseed(seed, "covariance"));
  for (std::size_t t = 0; t < tasks; ++t) {
    p.truth.f_star.push_back(std::move(weights[t]));
    p.truth.sigma_x.push_back(sigma_x);
    p.truth.sigma_w.push_back(noise_std);
    p.laws.emplace_back(IidGaussian{sigma_x});
  }
  p.holdout = HeldOutTask{std::move(weights[tasks]), sigma_x, noise_std, IidGaussian{sigma_x}};
  return p;
}

Matrix stationary_state_covariance(const MatrixRef& a, const MatrixRef& b, double sigma_u,
                                   const MatrixRef& sigma_w) {
  const Matrix forcing = sigma_u * sigma_u * b * b.transpose() + sigma_w;
  return dlyap(a, 0.5 * (forcing + forcing.transpose()));
}

MultiTaskProblem gen_sysid_problem(Eigen::Index d_state, Eigen::Index d_u, Eigen::Index r,
                                   std::size_t tasks, double sigma_u, double proc_noise_offset,
                                   std::uint64_t seed, const SysIdOptions& opts) {
  const Eigen::Index d_z = d_state + d_u;
  if (r < 1 || r > d_z) throw Error(ErrorKind::kInvalidArgument, "sysid needs 1 <= r <= d_x + d_u");
  if (!(sigma_u > 0.0)) throw Error(ErrorKind::kInvalidArgument, "sigma_u must be positive");

  const OrthonormalRows phi = gen_shared_representation(d_z, r, subseed(seed, "phi"));
  auto weights = gen_task_weights(d_state, r, tasks + 1, opts.rotation_scale, subseed(seed, "weights"));

  // Common rescaling of F0 keeps every A_t (held-out task included) stable.
  double max_rho = 0.0;
  for (const auto& f : weights) {
    max_rho = std::max(max_rho, spectral_radius((f * phi.mat()).leftCols(d_state)));
  }
  if (!std::isfinite(max_rho)) throw Error(ErrorKind::kUnstable, "degenerate system draw");
  if (max_rho > opts.max_spectral_radius) {
    const double c = opts.max_spectral_radius / max_rho;
    for (auto& f : weights) f *= c;
  }

  const Matrix sigma_w =
      gen_covariance(d_state, proc_noise_offset, subseed(seed, "process_noise"), opts.proc_noise_offdiag);
  const double noise_scale = std::sqrt(symmetric_eigen_extremes(sigma_w).max);
  const Matrix input_cov = sigma_u * sigma_u * Matrix::Identity(d_u, d_u);

  auto make_law = [&](const Matrix& f) {
    const Matrix m = f * phi.mat();
    LinearSystem law{m.leftCols(d_state), m.rightCols(d_u), sigma_w, sigma_u, Matrix()};
    if (!(spectral_radius(law.a) < opts.max_spectral_radius + 1e-9)) {
      throw Error(ErrorKind::kUnstable, "rescaling failed to stabilize a task");
    }
    law.sigma0 = stationary_state_covariance(law.a, law.b, sigma_u, sigma_w);
    return law;
  };

  MultiTaskProblem p{.setting = Setting::kSysId,
                     .truth = {phi, {}, {}, {}},
                     .dims = {d_z, d_state, r, static_cast<Eigen::Index>(tasks)},
                     .seed = seed};
  for (std::size_t t = 0; t < tasks; ++t) {
    LinearSystem law = make_law(weights[t]);
    p.truth.sigma_x.push_back(block_diag(law.sigma0, input_cov));
    p.truth.f_star.push_back(std::move(weights[t]));
    p.truth.sigma_w.push_back(noise_scale);
    p.laws.emplace_back(std::move(law));
  }
  LinearSystem held = make_law(weights[tasks]);
  Matrix held_cov = block_diag(held.sigma0, input_cov);
  p.holdout = HeldOutTask{std::move(weights[tasks]), std::move(held_cov), noise_scale, std::move(held)};
  return p;
}

std::vector<double> logspace(double lo, double hi, std::size_t count) {
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    out.push_back(std::pow(10.0, lo + (hi - lo) * frac));
  }
  return out;
}

MultiTaskProblem gen_imitation_problem(Eigen::Index n_x, Eigen::Index n_u, Eigen::Index obs_dim,
                                       std::size_t tasks, std::span<const double> cost_alphas,
                                       std::uint64_t seed, const ImitationOptions& opts) {
  if (obs_dim < n_x) throw Error(ErrorKind::kInvalidArgument, "obs_dim must be >= n_x");
  if (cost_alphas.size() != tasks + 1) {
    throw Error(ErrorKind::kInvalidArgument, "cost_alphas needs tasks + 1 entries");
  }

  // G has orthonormal columns, so its pseudo-inverse is G^T.
  const Matrix g = orthonormalize_rows(gaussian_matrix(n_x, obs_dim, subseed(seed, "G"))).q.mat().transpose();
  const Matrix g_pinv = g.transpose();
  const RowFactorization phi_fact = orthonormalize_rows(g_pinv);

  Rng rng(subseed(seed, "system"));
  Matrix a(n_x, n_x);
  Matrix b(n_x, n_u);
  for (Eigen::Index i = 0; i < n_x; ++i) {
    for (Eigen::Index j = 0; j < n_x; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
  }
  for (Eigen::Index i = 0; i < n_x; ++i) {
    for (Eigen::Index j = 0; j < n_u; ++j) b(i, j) = rng.uniform(-1.0, 1.0);
  }

  const Matrix r_cost = opts.input_cost * Matrix::Identity(n_u, n_u);
  std::vector<Matrix> gains;
  constexpr int kMaxShrinks = 60;
  for (int attempt = 0;; ++attempt) {
    gains.clear();
    try {
      for (double alpha : cost_alphas) {
        gains.push_back(dare(a, b, alpha * Matrix::Identity(n_x, n_x), r_cost).k);
      }
      break;
    } catch (const Error&) {
      if (attempt >= kMaxShrinks) throw;
      a *= 0.9;
    }
  }

  const Matrix sigma_w_obs = opts.obs_noise_scale * gen_covariance(obs_dim, opts.obs_noise_offset,
                                                                   subseed(seed, "obs_noise"),
                                                                   opts.obs_noise_offdiag);
  const Matrix sigma_z = Matrix::Identity(n_u, n_u);
  const Matrix a_obs = g * a * g_pinv;
  const Matrix b_obs = g * b;

  auto make_law = [&](const Matrix& k) {
    ExpertClosedLoop law{a_obs, b_obs, k * g_pinv, sigma_z, sigma_w_obs, Matrix()};
    const Matrix closed = law.a + law.b * law.k;
    if (!(spectral_radius(closed) < 1.0)) {
      throw Error(ErrorKind::kUnstable, "expert closed loop is unstable");
    }
    const Matrix forcing = law.b * sigma_z * law.b.transpose() + sigma_w_obs;
    law.sigma0 = dlyap(closed, 0.5 * (forcing + forcing.transpose()));
    return law;
  };

  MultiTaskProblem p{.setting = Setting::kImitation,
                     .truth = {phi_fact.q, {}, {}, {}},
                     .dims = {obs_dim, n_u, n_x, static_cast<Eigen::Index>(tasks)},
                     .seed = seed};
  for (std::size_t t = 0; t < tasks; ++t) {
    ExpertClosedLoop law = make_law(gains[t]);
    p.truth.sigma_x.push_back(law.sigma0);
    p.truth.f_star.push_back(gains[t] * phi_fact.r);
    p.truth.sigma_w.push_back(1.0);
    p.laws.emplace_back(std::move(law));
  }
  ExpertClosedLoop held = make_law(gains[tasks]);
  Matrix held_cov = held.sigma0;
  p.holdout = HeldOutTask{gains[tasks] * phi_fact.r, std::move(held_cov), 1.0, std::move(held)};
  return p;
}

}  // namespace dfw

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dfw/algorithms.hpp"
#include "dfw/harness.hpp"
#include "dfw/linalg.hpp"
#include "dfw/metrics.hpp"
#include "dfw/serialize.hpp"

namespace py = pybind11;
using dfw::Matrix;

namespace {

// Representations cross the boundary as plain arrays; orthonormality is checked on the way in.
dfw::OrthonormalRows rows(const Matrix& m) { return dfw::OrthonormalRows(m); }

dfw::Variant variant(const std::string& name) { return dfw::variant_from_string(name); }

py::dict record_dict(const dfw::IterationRecord& r) {
  py::dict d;
  d["iter"] = r.iter;
  d["dist"] = r.subspace_distance;
  d["contraction"] = r.contraction_factor;
  d["r_inv_norm"] = r.orthogonalization_inverse_norm;
  d["noise_norm"] = r.noise_term_norm ? py::cast(*r.noise_term_norm) : py::none();
  d["weight_norms"] = r.weight_norms;
  return d;
}

py::dict step_dict(const dfw::StepResult& s) {
  py::dict d;
  d["rep"] = s.rep_next.mat();
  d["r"] = s.r;
  d["weights"] = s.weights;
  d["record"] = record_dict(s.record);
  return d;
}

dfw::TrajectoryBatch make_batch(const std::vector<Matrix>& xs, const std::vector<Matrix>& ys, double split_fraction) {
  if (xs.size() != ys.size() || xs.empty()) {
    throw dfw::Error(dfw::ErrorKind::kDimensionMismatch, "need matching, nonempty lists of X and Y");
  }
  dfw::TrajectoryBatch b{{}, dfw::make_split(xs.front().rows(), split_fraction)};
  for (std::size_t t = 0; t < xs.size(); ++t) {
    if (xs[t].rows() != xs.front().rows() || ys[t].rows() != xs[t].rows()) {
      throw dfw::Error(dfw::ErrorKind::kDimensionMismatch, "all tasks need the same number of samples");
    }
    b.tasks.push_back({xs[t], ys[t], std::nullopt});
  }
  return b;
}

std::string dump(const dfw::Json& j) { return j.dump(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-task linear representation learning";

  static py::exception<dfw::Error> error(m, "DfwError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const dfw::Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      inst.attr("kind") = std::string(dfw::to_string(e.kind()));
      PyErr_SetObject(error.ptr(), inst.ptr());
    }
  });

  py::class_<dfw::MultiTaskProblem>(m, "Problem")
      .def_property_readonly("setting", [](const dfw::MultiTaskProblem& p) { return std::string(dfw::to_string(p.setting)); })
      .def_property_readonly("phi_star", [](const dfw::MultiTaskProblem& p) { return p.truth.phi_star.mat(); })
      .def_property_readonly("f_star", [](const dfw::MultiTaskProblem& p) { return p.truth.f_star; })
      .def_property_readonly("sigma_x", [](const dfw::MultiTaskProblem& p) { return p.truth.sigma_x; })
      .def_property_readonly("sigma_w", [](const dfw::MultiTaskProblem& p) { return p.truth.sigma_w; })
      .def_property_readonly("dims", [](const dfw::MultiTaskProblem& p) {
        return py::dict(py::arg("d_x") = p.dims.d_x, py::arg("d_y") = p.dims.d_y, py::arg("r") = p.dims.r,
                        py::arg("tasks") = p.dims.tasks);
      })
      .def("operator_star", &dfw::MultiTaskProblem::operator_star, py::arg("task"))
      .def("first_tasks", &dfw::MultiTaskProblem::first_tasks, py::arg("tasks"))
      .def("to_json", [](const dfw::MultiTaskProblem& p) { return dump(dfw::problem_to_json(p)); })
      .def_static("from_json", [](const std::string& s) { return dfw::problem_from_json(dfw::Json::parse(s)); })
      .def("hash", [](const dfw::MultiTaskProblem& p) { return dfw::problem_hash(p); });

  m.def("regression_problem", &dfw::gen_regression_problem, py::arg("d_x"), py::arg("d_y"), py::arg("r"),
        py::arg("tasks"), py::arg("noise_std") = 1.0, py::arg("rotation_scale") = 0.01, py::arg("seed") = 0);
  m.def(
      "sysid_problem",
      [](Eigen::Index d_state, Eigen::Index d_u, Eigen::Index r, std::size_t tasks, double sigma_u,
         double offset, std::uint64_t seed) {
        return dfw::gen_sysid_problem(d_state, d_u, r, tasks, sigma_u, offset, seed);
      },
      py::arg("d_state"), py::arg("d_u"), py::arg("r"), py::arg("tasks"), py::arg("sigma_u") = 1.0,
      py::arg("proc_noise_offset") = 5.0, py::arg("seed") = 0);
  m.def(
      "imitation_problem",
      [](Eigen::Index n_x, Eigen::Index n_u, Eigen::Index obs_dim, std::size_t tasks,
         std::vector<double> alphas, std::uint64_t seed) {
        if (alphas.empty()) alphas = dfw::logspace(0.0, 3.0, tasks + 1);
        return dfw::gen_imitation_problem(n_x, n_u, obs_dim, tasks, alphas, seed);
      },
      py::arg("n_x"), py::arg("n_u"), py::arg("obs_dim"), py::arg("tasks"), py::arg("cost_alphas") = std::vector<double>{},
      py::arg("seed") = 0);

  m.def(
      "sample_batch",
      [](const dfw::MultiTaskProblem& p, Eigen::Index n, double split_fraction, std::uint64_t seed) {
        const auto b = dfw::sample_batch(p, n, split_fraction, seed);
        py::list xs, ys;
        for (const auto& t : b.tasks) {
          xs.append(t.x);
          ys.append(t.y);
        }
        return py::make_tuple(xs, ys, b.split.first.size());
      },
      py::arg("problem"), py::arg("n"), py::arg("split_fraction") = 0.5, py::arg("seed") = 0,
      "Returns (xs, ys, n1): per-task covariates and labels; the first n1 rows fit the weights.");

  m.def(
      "dfw_step",
      [](const std::vector<Matrix>& xs, const std::vector<Matrix>& ys, const Matrix& rep, double step_size,
         double split_fraction, bool ridge_fallback) {
        return step_dict(dfw::dfw_step(make_batch(xs, ys, split_fraction), rows(rep), step_size, {}, ridge_fallback));
      },
      py::arg("xs"), py::arg("ys"), py::arg("rep"), py::arg("step_size"), py::arg("split_fraction") = 0.5,
      py::arg("ridge_fallback") = false);
  m.def(
      "amd_step",
      [](const std::vector<Matrix>& xs, const std::vector<Matrix>& ys, const Matrix& rep, double step_size) {
        return step_dict(dfw::amd_step(make_batch(xs, ys, 0.5), rows(rep), step_size));
      },
      py::arg("xs"), py::arg("ys"), py::arg("rep"), py::arg("step_size"));

  m.def(
      "init_representation",
      [](const dfw::MultiTaskProblem& p, double gamma, bool random, std::uint64_t seed) {
        const auto mode = random ? dfw::InitMode::kRandom : dfw::InitMode::kRandomRotationOfTruth;
        return dfw::init_representation(p, mode, gamma, seed).mat();
      },
      py::arg("problem"), py::arg("gamma") = 1.0, py::arg("random") = false, py::arg("seed") = 0);
  m.def("oracle_step_size", &dfw::oracle_step_size, py::arg("problem"));

  m.def(
      "run_training",
      [](const dfw::MultiTaskProblem& p, const Matrix& init, const std::string& algorithm, double step_size,
         int iterations, Eigen::Index batch_size, double split_fraction, bool oracle_step, std::uint64_t seed) {
        dfw::AlgoConfig c;
        c.variant = variant(algorithm);
        c.step_size = step_size;
        c.iterations = iterations;
        c.batch_size = batch_size;
        c.split_fraction = split_fraction;
        c.oracle_step_size = oracle_step;
        const auto start = rows(init);
        std::optional<dfw::TrainingResult> res;
        {
          py::gil_scoped_release release;
          res = dfw::run_training(p, start, c, seed);
        }
        py::list recs;
        for (const auto& r : res->records) recs.append(record_dict(r));
        return py::make_tuple(res->final_rep.mat(), recs);
      },
      py::arg("problem"), py::arg("init"), py::arg("algorithm") = "DFW", py::arg("step_size") = 7.5e-3,
      py::arg("iterations") = 100, py::arg("batch_size") = 100, py::arg("split_fraction") = 0.5,
      py::arg("oracle_step_size") = false, py::arg("seed") = 0);

  m.def(
      "erm_schedule",
      [](long long total, double rho, double c, double tau) {
        const auto s = dfw::erm_schedule(total, rho, c, tau);
        return py::dict(py::arg("batch_sizes") = s.batch_sizes, py::arg("guaranteed_bound") = s.guaranteed_bound,
                        py::arg("simulated_final") = s.simulated_final, py::arg("lemma_bound") = s.lemma_bound);
      },
      py::arg("total_samples"), py::arg("contraction"), py::arg("noise_constant"), py::arg("initial_distance"));

  m.def(
      "transfer_finetune",
      [](const Matrix& rep, const Matrix& x, const Matrix& y, std::optional<Matrix> m_star) {
        const auto r = dfw::transfer_finetune(rows(rep), dfw::TaskData{x, y, std::nullopt}, m_star);
        return py::make_tuple(r.weights, r.param_error ? py::cast(*r.param_error) : py::none());
      },
      py::arg("rep"), py::arg("x"), py::arg("y"), py::arg("m_star") = py::none());

  m.def("subspace_distance", [](const Matrix& a, const Matrix& b) { return dfw::subspace_distance(rows(a), rows(b)); },
        py::arg("rep"), py::arg("truth"));
  m.def("diversity_stats", [](const std::vector<Matrix>& f) {
    const auto s = dfw::diversity_stats(f);
    return py::dict(py::arg("lambda_f_min") = s.lambda_f_min, py::arg("lambda_f_max") = s.lambda_f_max,
                    py::arg("kappa_f") = s.kappa_f);
  });
  m.def("burnin_radius", &dfw::burnin_radius, py::arg("problem"));

  m.def("orthonormalize_rows", [](const Matrix& a) {
    auto f = dfw::orthonormalize_rows(a);
    return py::make_tuple(f.q.mat(), f.r);
  });
  m.def("dlyap", [](const Matrix& a, const Matrix& q) { return dfw::dlyap(a, q); }, py::arg("a"), py::arg("q"));
  m.def(
      "dare",
      [](const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r) {
        const auto s = dfw::dare(a, b, q, r);
        return py::make_tuple(s.p, s.k);
      },
      py::arg("a"), py::arg("b"), py::arg("q"), py::arg("r"));
  m.def("random_rotation", &dfw::random_rotation, py::arg("d"), py::arg("gamma"), py::arg("seed") = 0);

  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        const auto cfg = dfw::config_from_json(dfw::Json::parse(config_json));
        std::optional<dfw::ExperimentSummary> s;
        {
          py::gil_scoped_release release;
          s = dfw::run_experiment(cfg);
        }
        py::dict curves;
        for (const auto& c : s->curves) {
          curves[py::str(c.name)] = py::dict(py::arg("mean") = c.mean, py::arg("lower") = c.lower, py::arg("upper") = c.upper);
        }
        return curves;
      },
      py::arg("config_json"));
  m.def("presets", [] {
    std::vector<std::string> out;
    for (const auto& c : dfw::presets()) out.push_back(dump(dfw::config_to_json(c)));
    return out;
  });
}

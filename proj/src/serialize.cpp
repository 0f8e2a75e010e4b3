#include "dfw/serialize.hpp"

#include <fstream>

#include <fmt/format.h>

namespace dfw {

Json matrix_to_json(const MatrixRef& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j.front().is_array() || j.front().empty()) {
    throw Error(ErrorKind::kInvalidArgument, "matrix must be a nonempty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorKind::kDimensionMismatch, "ragged matrix rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

namespace {

Json law_to_json(const CovariateLaw& law) {
  return std::visit(
      [](const auto& l) -> Json {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, IidGaussian>) {
          return {{"variant", "iid_gaussian"}, {"sigma_x", matrix_to_json(l.sigma_x)}};
        } else if constexpr (std::is_same_v<L, LinearSystem>) {
          return {{"variant", "linear_system"},
                  {"a", matrix_to_json(l.a)},
                  {"b", matrix_to_json(l.b)},
                  {"sigma_w_proc", matrix_to_json(l.sigma_w_proc)},
                  {"sigma_u", l.sigma_u},
                  {"sigma0", matrix_to_json(l.sigma0)}};
        } else {
          return {{"variant", "expert_closed_loop"},
                  {"a", matrix_to_json(l.a)},
                  {"b", matrix_to_json(l.b)},
                  {"k", matrix_to_json(l.k)},
                  {"sigma_z", matrix_to_json(l.sigma_z)},
                  {"sigma_w_obs", matrix_to_json(l.sigma_w_obs)},
                  {"sigma0", matrix_to_json(l.sigma0)}};
        }
      },
      law);
}

CovariateLaw law_from_json(const Json& j) {
  const auto variant = j.at("variant").get<std::string>();
  if (variant == "iid_gaussian") return IidGaussian{matrix_from_json(j.at("sigma_x"))};
  if (variant == "linear_system") {
    return LinearSystem{matrix_from_json(j.at("a")), matrix_from_json(j.at("b")),
                        matrix_from_json(j.at("sigma_w_proc")), j.at("sigma_u").get<double>(),
                        matrix_from_json(j.at("sigma0"))};
  }
  if (variant == "expert_closed_loop") {
    return ExpertClosedLoop{matrix_from_json(j.at("a")),       matrix_from_json(j.at("b")),
                            matrix_from_json(j.at("k")),       matrix_from_json(j.at("sigma_z")),
                            matrix_from_json(j.at("sigma_w_obs")), matrix_from_json(j.at("sigma0"))};
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown covariate law '" + variant + "'");
}

}  // namespace

Json problem_to_json(const MultiTaskProblem& p) {
  Json tasks = Json::array();
  for (std::size_t t = 0; t < p.laws.size(); ++t) {
    tasks.push_back({{"f_star", matrix_to_json(p.truth.f_star[t])},
                     {"sigma_x", matrix_to_json(p.truth.sigma_x[t])},
                     {"sigma_w", p.truth.sigma_w[t]},
                     {"law", law_to_json(p.laws[t])}});
  }
  Json j{{"setting", std::string(to_string(p.setting))},
         {"dims", {{"d_x", p.dims.d_x}, {"d_y", p.dims.d_y}, {"r", p.dims.r}, {"tasks", p.dims.tasks}}},
         {"seed", p.seed},
         {"phi_star", matrix_to_json(p.truth.phi_star.mat())},
         {"tasks", std::move(tasks)}};
  j["subgaussian_gamma"] = p.subgaussian_gamma ? Json(*p.subgaussian_gamma) : Json(nullptr);
  if (p.holdout) {
    j["holdout"] = {{"f_star", matrix_to_json(p.holdout->f_star)},
                    {"sigma_x", matrix_to_json(p.holdout->sigma_x)},
                    {"sigma_w", p.holdout->sigma_w},
                    {"law", law_to_json(p.holdout->law)}};
  }
  return j;
}

MultiTaskProblem problem_from_json(const Json& j) {
  MultiTaskProblem p{.setting = setting_from_string(j.at("setting").get<std::string>()),
                     .truth = {OrthonormalRows(matrix_from_json(j.at("phi_star"))), {}, {}, {}}};
  const Json& dims = j.at("dims");
  p.dims = {dims.at("d_x").get<Eigen::Index>(), dims.at("d_y").get<Eigen::Index>(),
            dims.at("r").get<Eigen::Index>(), dims.at("tasks").get<Eigen::Index>()};
  p.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("subgaussian_gamma") && !j["subgaussian_gamma"].is_null()) {
    p.subgaussian_gamma = j["subgaussian_gamma"].get<double>();
  }
  for (const Json& task : j.at("tasks")) {
    p.truth.f_star.push_back(matrix_from_json(task.at("f_star")));
    p.truth.sigma_x.push_back(matrix_from_json(task.at("sigma_x")));
    p.truth.sigma_w.push_back(task.at("sigma_w").get<double>());
    p.laws.push_back(law_from_json(task.at("law")));
  }
  if (j.contains("holdout")) {
    const Json& h = j["holdout"];
    p.holdout = HeldOutTask{matrix_from_json(h.at("f_star")), matrix_from_json(h.at("sigma_x")),
                            h.at("sigma_w").get<double>(), law_from_json(h.at("law"))};
  }
  p.validate();
  return p;
}

std::uint64_t problem_hash(const MultiTaskProblem& p) {
  const std::string text = problem_to_json(p).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

Json representation_to_json(const OrthonormalRows& rep) {
  return {{"rank", rep.rank()}, {"dim", rep.dim()}, {"rows", matrix_to_json(rep.mat())}};
}

OrthonormalRows representation_from_json(const Json& j) {
  return OrthonormalRows(matrix_from_json(j.at("rows")));
}

Json burnin_report_to_json(const BurninReport& report) {
  Json conds = Json::array();
  for (const auto& c : report.conditions) {
    conds.push_back({{"condition", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"margin", c.margin}, {"pass", c.pass}});
  }
  return {{"delta", report.delta}, {"convention", report.convention}, {"conditions", std::move(conds)}};
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kIo, fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace dfw

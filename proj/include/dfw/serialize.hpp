#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "dfw/linalg.hpp"
#include "dfw/metrics.hpp"
#include "dfw/taskgen.hpp"

namespace dfw {

using Json = nlohmann::json;

Json matrix_to_json(const MatrixRef& m);
Matrix matrix_from_json(const Json& j);

Json problem_to_json(const MultiTaskProblem& p);
MultiTaskProblem problem_from_json(const Json& j);

/// FNV-1a over the compact JSON form of the problem.
std::uint64_t problem_hash(const MultiTaskProblem& p);

Json representation_to_json(const OrthonormalRows& rep);
OrthonormalRows representation_from_json(const Json& j);

Json burnin_report_to_json(const BurninReport& report);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace dfw

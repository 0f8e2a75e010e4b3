#include "dfw/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <iostream>
#include <regex>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "dfw/datasim.hpp"
#include "dfw/metrics.hpp"
#include "dfw/rng.hpp"

namespace dfw {

namespace {

constexpr std::uint64_t kProblemTag = 0x70726f626c656dULL;
constexpr std::uint64_t kInitTag = 0x696e6974ULL;
constexpr std::uint64_t kTrainTag = 0x747261696eULL;
constexpr std::uint64_t kTransferTag = 0x7472616e73666572ULL;

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.17g}", v);
}

std::string split_mode_name(SplitMode m) {
  return m == SplitMode::kContiguous ? "contiguous" : "interleaved";
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  return j[key].get<T>();
}

VariantSpec variant_from_json(const Json& j) {
  if (j.is_string()) return parse_variant_name(j.get<std::string>());
  if (!j.is_object()) throw Error(ErrorKind::kInvalidArgument, "variant must be a string or object");
  VariantSpec v;
  v.name = j.at("name").get<std::string>();
  if (j.contains("algorithm")) {
    v.algorithm = variant_from_string(j["algorithm"].get<std::string>());
    v.tasks = j.at("tasks").get<std::size_t>();
  } else {
    const VariantSpec parsed = parse_variant_name(v.name);
    v.algorithm = parsed.algorithm;
    v.tasks = get_or<std::size_t>(j, "tasks", parsed.tasks);
  }
  if (j.contains("step_size")) {
    if (j["step_size"].is_string()) {
      if (j["step_size"].get<std::string>() != "oracle") {
        throw Error(ErrorKind::kInvalidArgument, "step_size must be a number or \"oracle\"");
      }
      v.oracle_step_size = true;
    } else {
      v.step_size = j["step_size"].get<double>();
    }
  }
  return v;
}

Json variant_to_json(const VariantSpec& v) {
  Json j{{"name", v.name}, {"algorithm", std::string(to_string(v.algorithm))}, {"tasks", v.tasks}};
  if (v.oracle_step_size) {
    j["step_size"] = "oracle";
  } else if (v.step_size) {
    j["step_size"] = *v.step_size;
  }
  return j;
}

AlgoConfig algo_config(const ExperimentConfig& c, const VariantSpec& v) {
  AlgoConfig a;
  a.variant = v.algorithm;
  a.step_size = v.step_size.value_or(c.step_size);
  a.oracle_step_size = v.oracle_step_size;
  a.split_fraction = c.split_fraction;
  a.split_mode = c.split_mode;
  a.iterations = c.iterations;
  a.batch_size = c.batch_size;
  a.ridge_fallback = c.ridge_fallback;
  if (c.erm) {
    const ErmSchedule s = erm_schedule(c.erm->total_samples, c.erm->contraction, c.erm->noise_constant,
                                       c.erm->initial_distance);
    for (auto m : s.batch_sizes) a.batch_schedule.push_back(std::max<Eigen::Index>(m, c.batch_size));
  }
  return a;
}

Eigen::Index covariate_dim(const ExperimentConfig& c) {
  switch (c.setting) {
    case Setting::kRegression: return c.d_x;
    case Setting::kSysId: return c.d_x + c.d_u;
    case Setting::kImitation: return c.obs_dim;
  }
  return c.d_x;
}

void write_partial_marker(const std::filesystem::path& dir, const std::string& message) {
  std::ofstream out(dir / ".partial");
  out << message << '\n';
}

const char* kCsvHeader = "variant,trial,iter,dist,contraction,r_inv_norm,noise_norm,wall_ms\n";

void write_record_rows(std::ostream& out, const std::string& variant, std::size_t trial,
                       const TrainingResult& res, bool wall_time) {
  for (const auto& rec : res.records) {
    out << variant << ',' << trial << ',' << rec.iter << ',' << fmt_double(rec.subspace_distance) << ','
        << fmt_double(rec.contraction_factor) << ',' << fmt_double(rec.orthogonalization_inverse_norm)
        << ',' << fmt_double(rec.noise_term_norm.value_or(std::nan(""))) << ','
        << fmt_double(wall_time ? rec.wall_ms : 0.0) << '\n';
  }
}

std::string iso_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

VariantSpec parse_variant_name(const std::string& name) {
  static const std::regex pattern(R"(^(DFW|AMD|dfw|amd)(?:-T(\d+))?(?:-.*)?$)");
  std::smatch m;
  if (!std::regex_match(name, m, pattern)) {
    throw Error(ErrorKind::kInvalidArgument, "cannot parse variant name '" + name + "'");
  }
  VariantSpec v;
  v.name = name;
  v.algorithm = variant_from_string(m[1].str());
  v.tasks = m[2].matched ? std::stoul(m[2].str()) : 1;
  return v;
}

void ExperimentConfig::validate() const {
  auto positive = [](auto v, const char* what) {
    if (!(v > 0)) throw Error(ErrorKind::kInvalidArgument, fmt::format("{} must be positive", what));
  };
  positive(tasks, "tasks");
  positive(batch_size, "batch_size");
  positive(iterations, "iterations");
  positive(trials, "trials");
  positive(r, "r");
  if (variants.empty()) throw Error(ErrorKind::kInvalidArgument, "variant list is empty");
  std::set<std::string> names;
  for (const auto& v : variants) {
    if (v.tasks < 1 || v.tasks > tasks) {
      throw Error(ErrorKind::kInvalidArgument,
                  fmt::format("variant {} uses {} tasks but the problem has {}", v.name, v.tasks, tasks));
    }
    if (!names.insert(v.name).second) {
      throw Error(ErrorKind::kInvalidArgument, "duplicate variant name " + v.name);
    }
  }
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "split_fraction must lie in (0, 1)");
  }
  if (setting == Setting::kImitation && !cost_alphas.empty() && cost_alphas.size() != tasks + 1) {
    throw Error(ErrorKind::kInvalidArgument, "cost_alphas needs tasks + 1 entries");
  }
  if (transfer && transfer->n_prime.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "transfer.n_prime is empty");
  }
}

ExperimentConfig config_from_json(const Json& j) {
  static const std::set<std::string> known = {
      "setting",   "d_x",          "d_y",         "r",          "d_u",
      "n_x",       "n_u",          "obs_dim",     "tasks",      "batch_size",
      "iterations", "step_size",   "variants",    "trials",     "master_seed",
      "split_fraction", "split_mode", "output_dir", "noise_std", "rotation_scale",
      "init_gamma", "init_mode",   "sigma_u",     "proc_noise_offset", "cost_alphas",
      "ridge_fallback", "record_wall_time", "save_problems", "erm_schedule", "transfer"};
  if (!j.is_object()) throw Error(ErrorKind::kInvalidArgument, "config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw Error(ErrorKind::kInvalidArgument, "unknown config key '" + key + "'");
  }
  ExperimentConfig c;
  try {
    c.setting = setting_from_string(get_or<std::string>(j, "setting", "regression"));
    c.d_x = get_or(j, "d_x", c.d_x);
    c.d_y = get_or(j, "d_y", c.d_y);
    c.r = get_or(j, "r", c.r);
    c.d_u = get_or(j, "d_u", c.d_u);
    c.n_x = get_or(j, "n_x", c.n_x);
    c.n_u = get_or(j, "n_u", c.n_u);
    c.obs_dim = get_or(j, "obs_dim", c.obs_dim);
    c.tasks = get_or(j, "tasks", c.tasks);
    c.batch_size = get_or(j, "batch_size", c.batch_size);
    c.iterations = get_or(j, "iterations", c.iterations);
    c.step_size = get_or(j, "step_size", c.step_size);
    c.trials = get_or(j, "trials", c.trials);
    c.master_seed = get_or(j, "master_seed", c.master_seed);
    c.split_fraction = get_or(j, "split_fraction", c.split_fraction);
    const auto mode = get_or<std::string>(j, "split_mode", "contiguous");
    if (mode == "contiguous") {
      c.split_mode = SplitMode::kContiguous;
    } else if (mode == "interleaved") {
      c.split_mode = SplitMode::kInterleaved;
    } else {
      throw Error(ErrorKind::kInvalidArgument, "unknown split_mode '" + mode + "'");
    }
    c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir.string());
    c.noise_std = get_or(j, "noise_std", c.noise_std);
    c.rotation_scale = get_or(j, "rotation_scale", c.rotation_scale);
    c.init_gamma = get_or(j, "init_gamma", c.init_gamma);
    const auto init = get_or<std::string>(j, "init_mode", "rotation_of_truth");
    if (init == "rotation_of_truth") {
      c.init_mode = InitMode::kRandomRotationOfTruth;
    } else if (init == "random") {
      c.init_mode = InitMode::kRandom;
    } else {
      throw Error(ErrorKind::kInvalidArgument, "unknown init_mode '" + init + "'");
    }
    c.sigma_u = get_or(j, "sigma_u", c.sigma_u);
    c.proc_noise_offset = get_or(j, "proc_noise_offset", c.proc_noise_offset);
    c.cost_alphas = get_or(j, "cost_alphas", c.cost_alphas);
    c.ridge_fallback = get_or(j, "ridge_fallback", c.ridge_fallback);
    c.record_wall_time = get_or(j, "record_wall_time", c.record_wall_time);
    c.save_problems = get_or(j, "save_problems", c.save_problems);
    if (j.contains("variants")) {
      for (const Json& v : j["variants"]) c.variants.push_back(variant_from_json(v));
    }
    if (j.contains("erm_schedule") && !j["erm_schedule"].is_null()) {
      const Json& e = j["erm_schedule"];
      c.erm = ErmScheduleSpec{e.at("total_samples").get<long long>(), e.at("contraction").get<double>(),
                              e.at("noise_constant").get<double>(), e.at("initial_distance").get<double>()};
    }
    if (j.contains("transfer") && !j["transfer"].is_null()) {
      const Json& t = j["transfer"];
      TransferSpec spec;
      spec.n_prime = t.at("n_prime").get<std::vector<Eigen::Index>>();
      spec.trials = get_or<std::size_t>(t, "trials", spec.trials);
      spec.variant = get_or<std::string>(t, "variant", "");
      spec.representation = get_or<std::string>(t, "representation", spec.representation);
      if (spec.representation != "trained" && spec.representation != "truth") {
        throw Error(ErrorKind::kInvalidArgument, "transfer.representation must be trained or truth");
      }
      c.transfer = std::move(spec);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

Json config_to_json(const ExperimentConfig& c) {
  Json variants = Json::array();
  for (const auto& v : c.variants) variants.push_back(variant_to_json(v));
  Json j{{"setting", std::string(to_string(c.setting))},
         {"d_x", c.d_x},
         {"d_y", c.d_y},
         {"r", c.r},
         {"d_u", c.d_u},
         {"n_x", c.n_x},
         {"n_u", c.n_u},
         {"obs_dim", c.obs_dim},
         {"tasks", c.tasks},
         {"batch_size", c.batch_size},
         {"iterations", c.iterations},
         {"step_size", c.step_size},
         {"variants", std::move(variants)},
         {"trials", c.trials},
         {"master_seed", c.master_seed},
         {"split_fraction", c.split_fraction},
         {"split_mode", split_mode_name(c.split_mode)},
         {"output_dir", c.output_dir.string()},
         {"noise_std", c.noise_std},
         {"rotation_scale", c.rotation_scale},
         {"init_gamma", c.init_gamma},
         {"init_mode", c.init_mode == InitMode::kRandom ? "random" : "rotation_of_truth"},
         {"sigma_u", c.sigma_u},
         {"proc_noise_offset", c.proc_noise_offset},
         {"cost_alphas", c.cost_alphas},
         {"ridge_fallback", c.ridge_fallback},
         {"record_wall_time", c.record_wall_time},
         {"save_problems", c.save_problems}};
  if (c.erm) {
    j["erm_schedule"] = {{"total_samples", c.erm->total_samples},
                         {"contraction", c.erm->contraction},
                         {"noise_constant", c.erm->noise_constant},
                         {"initial_distance", c.erm->initial_distance}};
  }
  if (c.transfer) {
    j["transfer"] = {{"n_prime", c.transfer->n_prime},
                     {"trials", c.transfer->trials},
                     {"variant", c.transfer->variant},
                     {"representation", c.transfer->representation}};
  }
  return j;
}

std::uint64_t problem_seed(const ExperimentConfig& c, std::size_t trial) {
  return derive_seed(c.master_seed, {kProblemTag, trial});
}

MultiTaskProblem make_problem(const ExperimentConfig& c, std::size_t trial) {
  const std::uint64_t seed = problem_seed(c, trial);
  switch (c.setting) {
    case Setting::kRegression:
      return gen_regression_problem(c.d_x, c.d_y, c.r, c.tasks, c.noise_std, c.rotation_scale, seed);
    case Setting::kSysId:
      return gen_sysid_problem(c.d_x, c.d_u, c.r, c.tasks, c.sigma_u, c.proc_noise_offset, seed,
                               SysIdOptions{.rotation_scale = c.rotation_scale});
    case Setting::kImitation: {
      const auto alphas = c.cost_alphas.empty() ? logspace(0.0, 3.0, c.tasks + 1) : c.cost_alphas;
      return gen_imitation_problem(c.n_x, c.n_u, c.obs_dim, c.tasks, alphas, seed);
    }
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown setting");
}

unsigned worker_threads() {
  const char* env = std::getenv("DFW_LAB_THREADS");
  if (env == nullptr) return 1;
  try {
    const long v = std::stol(env);
    return v >= 1 ? static_cast<unsigned>(std::min<long>(v, 256)) : 1;
  } catch (const std::exception&) {
    return 1;
  }
}

VariantCurve aggregate_curve(const std::string& name, const std::vector<TrainingResult>& trials) {
  VariantCurve curve{name, {}, {}, {}};
  if (trials.empty()) return curve;
  const std::size_t iters = trials.front().records.size();
  const double n = static_cast<double>(trials.size());
  for (std::size_t k = 0; k < iters; ++k) {
    double sum = 0.0;
    for (const auto& t : trials) sum += t.records[k].subspace_distance;
    const double mean = sum / n;
    double var = 0.0;
    for (const auto& t : trials) var += std::pow(t.records[k].subspace_distance - mean, 2);
    const double se = trials.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
    curve.mean.push_back(mean);
    curve.lower.push_back(mean - 1.96 * se);
    curve.upper.push_back(mean + 1.96 * se);
  }
  return curve;
}

ExperimentSummary run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto& dir = config.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create output directory " + dir.string());
  std::filesystem::remove(dir / ".partial", ec);
  const auto started = std::chrono::steady_clock::now();

  const Eigen::Index d_cov = covariate_dim(config);
  const auto n2 = config.batch_size - static_cast<Eigen::Index>(
                                          std::ceil(config.split_fraction * static_cast<double>(config.batch_size)));
  if (n2 < d_cov && std::any_of(config.variants.begin(), config.variants.end(),
                                [](const auto& v) { return v.algorithm == Variant::kDfw; })) {
    std::cerr << fmt::format("warning: gradient half holds {} samples, fewer than covariate dimension {}\n",
                             n2, d_cov);
  }

  ExperimentSummary summary;
  std::vector<MultiTaskProblem> problems;
  try {
    for (std::size_t j = 0; j < config.trials; ++j) {
      problems.push_back(make_problem(config, j));
      summary.problem_hashes.push_back(problem_hash(problems.back()));
      if (config.save_problems) {
        write_json_file(dir / fmt::format("problem_trial{}.json", j), problem_to_json(problems.back()));
      }
    }
  } catch (const Error& e) {
    write_partial_marker(dir, e.what());
    throw;
  }

  const std::size_t n_var = config.variants.size();
  const std::size_t n_jobs = n_var * config.trials;
  std::vector<std::optional<TrainingResult>> results(n_jobs);
  std::vector<std::exception_ptr> errors(n_jobs);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t job = next++; job < n_jobs; job = next++) {
      const std::size_t v = job / config.trials;
      const std::size_t trial = job % config.trials;
      const VariantSpec& spec = config.variants[v];
      try {
        const MultiTaskProblem& full = problems[trial];
        const MultiTaskProblem sub = full.first_tasks(spec.tasks);
        const OrthonormalRows init = init_representation(full, config.init_mode, config.init_gamma,
                                                         derive_seed(config.master_seed, {kInitTag, trial}));
        results[job] = run_training(sub, init, algo_config(config, spec),
                                    derive_seed(config.master_seed, {kTrainTag, trial}));
      } catch (const Error& e) {
        errors[job] = std::make_exception_ptr(
            Error(e.kind(), fmt::format("variant {}, trial {}: {}", spec.name, trial, e.detail())));
      } catch (...) {
        errors[job] = std::current_exception();
      }
    }
  };
  {
    const unsigned n_threads = std::min<unsigned>(worker_threads(), static_cast<unsigned>(n_jobs));
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
  }

  std::exception_ptr first_error;
  for (std::size_t v = 0; v < n_var; ++v) {
    const VariantSpec& spec = config.variants[v];
    std::vector<TrainingResult> done;
    std::ofstream all(dir / fmt::format("{}.csv", spec.name));
    all << kCsvHeader;
    for (std::size_t trial = 0; trial < config.trials; ++trial) {
      const std::size_t job = v * config.trials + trial;
      if (errors[job]) {
        if (!first_error) first_error = errors[job];
        continue;
      }
      const TrainingResult& res = *results[job];
      std::ofstream one(dir / fmt::format("{}_trial{}.csv", spec.name, trial));
      one << kCsvHeader;
      write_record_rows(one, spec.name, trial, res, config.record_wall_time);
      write_record_rows(all, spec.name, trial, res, config.record_wall_time);
      write_json_file(dir / fmt::format("{}_trial{}_rep.json", spec.name, trial),
                      representation_to_json(res.final_rep));
      done.push_back(res);
    }
    if (done.size() == config.trials) summary.curves.push_back(aggregate_curve(spec.name, done));
    summary.results.push_back(std::move(done));
  }
  if (first_error) {
    try {
      std::rethrow_exception(first_error);
    } catch (const std::exception& e) {
      write_partial_marker(dir, e.what());
    }
    std::rethrow_exception(first_error);
  }

  Json variants = Json::object();
  for (std::size_t v = 0; v < n_var; ++v) {
    const auto& curve = summary.curves[v];
    const auto& spec = config.variants[v];
    const AlgoConfig algo = algo_config(config, spec);
    std::vector<double> finals;
    for (const auto& res : summary.results[v]) finals.push_back(res.records.back().subspace_distance);
    variants[spec.name] = {{"algorithm", std::string(to_string(spec.algorithm))},
                           {"tasks", spec.tasks},
                           {"step_size", spec.oracle_step_size ? Json("oracle") : Json(algo.step_size)},
                           {"final_mean", curve.mean.back()},
                           {"final_lower", curve.lower.back()},
                           {"final_upper", curve.upper.back()},
                           {"final_per_trial", finals},
                           {"mean", curve.mean},
                           {"lower", curve.lower},
                           {"upper", curve.upper}};
  }

  Json trials = Json::array();
  const Eigen::Index n1 = config.batch_size - n2;
  for (std::size_t j = 0; j < config.trials; ++j) {
    const DiversityStats div = diversity_stats(problems[j].truth.f_star);
    Json entry{{"trial", j},
               {"problem_seed", problem_seed(config, j)},
               {"problem_hash", fmt::format("{:016x}", summary.problem_hashes[j])},
               {"lambda_f_min", div.lambda_f_min},
               {"lambda_f_max", div.lambda_f_max}};
    try {
      const OrthonormalRows init = init_representation(problems[j], config.init_mode, config.init_gamma,
                                                       derive_seed(config.master_seed, {kInitTag, j}));
      entry["burnin"] = burnin_report_to_json(
          burnin_report(problems[j], init, BurninInputs{n1, n2, config.step_size, 0.05, {}}));
    } catch (const Error& e) {
      entry["burnin"] = {{"error", e.what()}};
    }
    trials.push_back(std::move(entry));
  }

  Json out{{"config", config_to_json(config)},
           {"master_seed", config.master_seed},
           {"variants", std::move(variants)},
           {"trials", std::move(trials)}};
  if (config.erm) {
    const ErmSchedule s = erm_schedule(config.erm->total_samples, config.erm->contraction,
                                       config.erm->noise_constant, config.erm->initial_distance);
    out["erm_schedule"] = {{"rounds", s.rounds},
                           {"batch_sizes", s.batch_sizes},
                           {"guaranteed_bound", s.guaranteed_bound},
                           {"simulated_final", s.simulated_final},
                           {"lemma_bound", s.lemma_bound}};
  }
  out["metadata"] = {
      {"generated_at", iso_timestamp()},
      {"wall_ms",
       std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count()},
      {"threads", worker_threads()}};
  write_json_file(dir / "summary.json", out);
  return summary;
}

std::vector<TransferRow> run_transfer_eval(const ExperimentConfig& config) {
  config.validate();
  if (!config.transfer) throw Error(ErrorKind::kInvalidArgument, "config has no transfer block");
  const TransferSpec& spec = *config.transfer;
  const bool use_truth = spec.representation == "truth";
  std::string variant = spec.variant;
  if (!use_truth && variant.empty()) variant = config.variants.front().name;
  const std::string label = use_truth ? "truth" : variant;

  std::vector<MultiTaskProblem> problems;
  std::vector<OrthonormalRows> reps;
  for (std::size_t j = 0; j < config.trials; ++j) {
    problems.push_back(make_problem(config, j));
    if (!problems.back().holdout) throw Error(ErrorKind::kInvalidArgument, "problem has no held-out task");
    if (use_truth) {
      reps.push_back(problems.back().truth.phi_star);
    } else {
      const auto path = config.output_dir / fmt::format("{}_trial{}_rep.json", variant, j);
      if (!std::filesystem::exists(path)) {
        throw Error(ErrorKind::kIo, "missing trained representation " + path.string() +
                                        " (run the experiment first)");
      }
      reps.push_back(representation_from_json(read_json_file(path)));
    }
  }

  std::vector<TransferRow> rows;
  for (const Eigen::Index n_prime : spec.n_prime) {
    std::vector<double> errs;
    for (std::size_t i = 0; i < spec.trials; ++i) {
      const std::size_t j = i % config.trials;
      const HeldOutTask& task = *problems[j].holdout;
      const Matrix m_star = task.f_star * problems[j].truth.phi_star.mat();
      const TaskData data = sample_task(task.law, m_star, task.sigma_w, n_prime,
                                        derive_seed(config.master_seed, {kTransferTag, i,
                                                                         static_cast<std::uint64_t>(n_prime)}));
      const double e = *transfer_finetune(reps[j], data, m_star).param_error;
      errs.push_back(e * e);
    }
    const double n = static_cast<double>(errs.size());
    double mean = 0.0;
    for (double e : errs) mean += e;
    mean /= n;
    double var = 0.0;
    for (double e : errs) var += (e - mean) * (e - mean);
    const double se = errs.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
    rows.push_back({n_prime, mean, se, errs.size()});
  }

  std::filesystem::create_directories(config.output_dir);
  std::ofstream out(config.output_dir / fmt::format("transfer_{}.csv", label));
  if (!out) throw Error(ErrorKind::kIo, "cannot write transfer CSV");
  out << "n_prime,mean_param_error_sq,stderr,trials\n";
  for (const auto& r : rows) {
    out << r.n_prime << ',' << fmt_double(r.mean_sq_error) << ',' << fmt_double(r.stderr_sq_error) << ','
        << r.trials << '\n';
  }
  return rows;
}

std::vector<ExperimentConfig> presets() {
  ExperimentConfig reg;
  reg.setting = Setting::kRegression;
  reg.d_x = 50;
  reg.d_y = 50;
  reg.r = 7;
  reg.tasks = 25;
  reg.batch_size = 100;
  reg.iterations = 200;
  reg.step_size = 7.5e-3;
  // N2 = 50 equals d_x at an even split, which leaves the whitening matrix singular too often
  reg.split_fraction = 0.3;
  reg.variants = {parse_variant_name("DFW-T25"), parse_variant_name("DFW-T1"),
                  parse_variant_name("AMD-T25")};
  VariantSpec slow = parse_variant_name("AMD-T25-slow");
  slow.step_size = 7.5e-5;
  reg.variants.push_back(slow);
  reg.output_dir = "out/regression";
  reg.transfer = TransferSpec{{100, 200, 400, 800, 1600}, 20, "DFW-T25", "trained"};

  ExperimentConfig sys;
  sys.setting = Setting::kSysId;
  sys.d_x = 25;
  sys.d_u = 2;
  sys.r = 6;
  sys.tasks = 25;
  sys.batch_size = 100;
  sys.iterations = 200;
  sys.step_size = 1e-1;
  sys.sigma_u = 1.0;
  VariantSpec amd = parse_variant_name("AMD-T25");
  amd.step_size = 2e-3;
  sys.variants = {parse_variant_name("DFW-T25"), parse_variant_name("DFW-T1"), amd};
  sys.output_dir = "out/sysid";
  sys.transfer = TransferSpec{{100, 200, 400, 800, 1600}, 20, "DFW-T25", "trained"};

  ExperimentConfig il;
  il.setting = Setting::kImitation;
  il.n_x = 4;
  il.n_u = 4;
  il.obs_dim = 25;
  il.r = 4;
  il.tasks = 10;
  il.batch_size = 75;
  il.iterations = 200;
  il.step_size = 5e-2;
  il.variants = {parse_variant_name("DFW-T10"), parse_variant_name("DFW-T1"), parse_variant_name("AMD-T10")};
  // some experts have nearly degenerate task diversity; a fixed step crawls on those trials
  for (auto& v : il.variants) v.oracle_step_size = true;
  il.output_dir = "out/imitation";
  il.transfer = TransferSpec{{75, 150, 300, 600}, 20, "DFW-T10", "trained"};
  return {reg, sys, il};
}

}  // namespace dfw

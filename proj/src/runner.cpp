#include "morl/runner.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "morl/errors.hpp"
#include "morl/evaluation.hpp"
#include "morl/optim.hpp"
#include "morl/pareto.hpp"

namespace morl {
namespace {

using nlohmann::json;

// ---------------------------------------------------------------- names

const std::pair<TaskId, const char*> kTaskNames[] = {
    {TaskId::Schaffer, "schaffer"},
    {TaskId::FonsecaFleming, "fonseca-fleming"},
    {TaskId::Chain, "chain"},
};

const std::pair<MethodId, const char*> kMethodNames[] = {
    {MethodId::Dime, "dime"},
    {MethodId::Ls, "ls"},
    {MethodId::Mompo, "mompo"},
    {MethodId::DimeMulti, "dime-multi"},
    {MethodId::OfflineBc, "offline-bc"},
    {MethodId::OfflineCrr, "offline-crr"},
    {MethodId::OfflineDimeBc, "offline-dime-bc"},
    {MethodId::OfflineDimeAwbc, "offline-dime-awbc"},
    {MethodId::KickstartLs, "kickstart-ls"},
    {MethodId::KickstartDime, "kickstart-dime"},
};

TaskId parse_task(const std::string& s) {
  for (const auto& [id, name] : kTaskNames)
    if (s == name) return id;
  throw ConfigError("unknown task: " + s);
}

MethodId parse_method(const std::string& s) {
  for (const auto& [id, name] : kMethodNames)
    if (s == name) return id;
  throw ConfigError("unknown method: " + s);
}

// ---------------------------------------------------------------- config io

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end())
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void get_to(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

TradeoffSpec parse_tradeoffs(const json& j) {
  TradeoffSpec spec;
  check_keys(j, {"type", "lo", "hi", "count", "values"}, "tradeoffs");
  std::string type = "linspace";
  get_to(j, "type", type);
  if (type == "linspace") {
    spec.kind = TradeoffSpec::Kind::Linspace;
    get_to(j, "lo", spec.lo);
    get_to(j, "hi", spec.hi);
    get_to(j, "count", spec.count);
    if (j.contains("values"))
      throw ConfigError("tradeoffs: 'values' is only valid with type 'list'");
  } else if (type == "list") {
    spec.kind = TradeoffSpec::Kind::List;
    if (!j.contains("values"))
      throw ConfigError("tradeoffs: type 'list' requires 'values'");
    j.at("values").get_to(spec.values);
  } else {
    throw ConfigError("tradeoffs: unknown type '" + type + "'");
  }
  return spec;
}

json tradeoffs_to_json(const TradeoffSpec& spec) {
  json j;
  if (spec.kind == TradeoffSpec::Kind::Linspace) {
    j["type"] = "linspace";
    j["lo"] = spec.lo;
    j["hi"] = spec.hi;
    j["count"] = spec.count;
  } else {
    j["type"] = "list";
    j["values"] = spec.values;
  }
  return j;
}

DatasetSpec parse_dataset(const json& j) {
  DatasetSpec spec;
  check_keys(j, {"path", "behavior", "size", "seed"}, "offline.dataset");
  get_to(j, "path", spec.path);
  get_to(j, "size", spec.size);
  get_to(j, "seed", spec.seed);
  if (j.contains("behavior")) {
    spec.behavior.clear();
    for (const auto& c : j.at("behavior")) {
      check_keys(c, {"weight", "mean", "std"}, "offline.dataset.behavior[]");
      BehaviorComponent bc;
      get_to(c, "weight", bc.weight);
      get_to(c, "mean", bc.mean);
      get_to(c, "std", bc.std_dev);
      spec.behavior.push_back(bc);
    }
  }
  return spec;
}

json dataset_to_json(const DatasetSpec& spec) {
  json j;
  j["path"] = spec.path;
  j["size"] = spec.size;
  j["seed"] = spec.seed;
  j["behavior"] = json::array();
  for (const auto& c : spec.behavior)
    j["behavior"].push_back(
        {{"weight", c.weight}, {"mean", c.mean}, {"std", c.std_dev}});
  return j;
}

ExperimentConfig parse_config_json(const json& j) {
  ExperimentConfig c;
  check_keys(j,
             {"task", "method", "tradeoffs", "iterations", "seeds", "workers",
              "improvement", "projection", "mompo_epsilon_scale",
              "reward_scales", "init", "conditioned_blocks", "offline",
              "kickstart"},
             "config");
  if (!j.contains("task") || !j.contains("method"))
    throw ConfigError("config requires 'task' and 'method'");
  c.task = parse_task(j.at("task").get<std::string>());
  c.method = parse_method(j.at("method").get<std::string>());
  if (j.contains("tradeoffs")) c.tradeoffs = parse_tradeoffs(j.at("tradeoffs"));
  get_to(j, "iterations", c.iterations);
  get_to(j, "seeds", c.seeds);
  get_to(j, "workers", c.workers);
  if (c.iterations < 1) throw ConfigError("iterations must be >= 1");
  if (c.seeds.empty()) throw ConfigError("seeds must be nonempty");
  if (c.workers < 1) throw ConfigError("workers must be >= 1");

  if (j.contains("improvement")) {
    const auto& ji = j.at("improvement");
    check_keys(ji, {"epsilon", "sample_count", "eta_lo", "eta_hi",
                    "eta_tolerance"},
               "improvement");
    get_to(ji, "epsilon", c.improvement.epsilon);
    get_to(ji, "sample_count", c.improvement.sample_count);
    get_to(ji, "eta_lo", c.improvement.eta_lo);
    get_to(ji, "eta_hi", c.improvement.eta_hi);
    get_to(ji, "eta_tolerance", c.improvement.eta_tolerance);
  }
  if (j.contains("projection")) {
    const auto& jp = j.at("projection");
    check_keys(jp,
               {"beta_mean", "beta_cov", "dual_step_size", "step_size",
                "max_steps", "gradient_tolerance", "plain_gradient",
                "quadratic_penalty", "penalty_coeff"},
               "projection");
    get_to(jp, "beta_mean", c.projection.beta_mean);
    get_to(jp, "beta_cov", c.projection.beta_cov);
    get_to(jp, "dual_step_size", c.projection.dual_step_size);
    get_to(jp, "step_size", c.projection.optimizer.step_size);
    get_to(jp, "max_steps", c.projection.optimizer.max_steps);
    get_to(jp, "gradient_tolerance", c.projection.optimizer.gradient_tolerance);
    get_to(jp, "plain_gradient", c.projection.optimizer.plain_gradient);
    get_to(jp, "quadratic_penalty", c.projection.quadratic_penalty);
    get_to(jp, "penalty_coeff", c.projection.penalty_coeff);
  }
  get_to(j, "mompo_epsilon_scale", c.mompo_epsilon_scale);
  get_to(j, "reward_scales", c.reward_scales);
  if (j.contains("init")) {
    const auto& jn = j.at("init");
    check_keys(jn, {"mean", "std"}, "init");
    if (jn.contains("mean") && !jn.at("mean").is_null())
      c.init.mean = jn.at("mean").get<double>();
    get_to(jn, "std", c.init.std_dev);
  }
  get_to(j, "conditioned_blocks", c.conditioned_blocks);
  if (j.contains("offline")) {
    const auto& jo = j.at("offline");
    check_keys(jo, {"objective", "eta", "steps", "step_size", "sample_count",
                    "dataset"},
               "offline");
    get_to(jo, "objective", c.offline.objective);
    get_to(jo, "eta", c.offline.eta);
    get_to(jo, "steps", c.offline.steps);
    get_to(jo, "step_size", c.offline.step_size);
    get_to(jo, "sample_count", c.offline.sample_count);
    if (jo.contains("dataset")) c.offline.dataset = parse_dataset(jo.at("dataset"));
  }
  if (j.contains("kickstart")) {
    const auto& jk = j.at("kickstart");
    check_keys(jk,
               {"prior_mean", "prior_std", "objective", "alpha", "learned", "x",
                "threshold_c", "alpha_step", "eta", "eta1", "eta2"},
               "kickstart");
    get_to(jk, "prior_mean", c.kickstart.prior_mean);
    get_to(jk, "prior_std", c.kickstart.prior_std);
    get_to(jk, "objective", c.kickstart.objective);
    get_to(jk, "alpha", c.kickstart.tradeoff.alpha);
    get_to(jk, "learned", c.kickstart.tradeoff.learned);
    get_to(jk, "x", c.kickstart.tradeoff.x);
    get_to(jk, "threshold_c", c.kickstart.tradeoff.threshold_c);
    get_to(jk, "alpha_step", c.kickstart.tradeoff.step_size);
    get_to(jk, "eta", c.kickstart.eta);
    get_to(jk, "eta1", c.kickstart.eta1);
    get_to(jk, "eta2", c.kickstart.eta2);
  }
  return c;
}

// ---------------------------------------------------------------- output fmt

std::string fmt(double v) {
  if (!std::isfinite(v)) throw NumericalFailure("non-finite value in output");
  std::ostringstream ss;
  ss << std::setprecision(12) << v;
  return ss.str();
}

std::string hash_hex(std::uint64_t h) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

std::string front_csv_text(const ExperimentConfig& config,
                           const std::vector<SweepRow>& rows,
                           bool conditioned_column) {
  std::ostringstream out;
  out << "# config=" << hash_hex(config_hash(config)) << "\n";
  out << "method,alpha_1,alpha_2,obj_1,obj_2,iterations,seed";
  if (conditioned_column) out << ",conditioned";
  out << "\n";
  for (const auto& r : rows) {
    out << r.method << "," << fmt(r.tradeoff[0]) << "," << fmt(r.tradeoff[1])
        << "," << fmt(r.obj1) << "," << fmt(r.obj2) << "," << r.iterations << ","
        << r.seed;
    if (conditioned_column) out << "," << (r.conditioned ? 1 : 0);
    out << "\n";
  }
  return out.str();
}

std::vector<std::array<double, 2>> row_points(const std::vector<SweepRow>& rows) {
  std::vector<std::array<double, 2>> pts;
  pts.reserve(rows.size());
  for (const auto& r : rows) pts.push_back({r.obj1, r.obj2});
  return pts;
}

// Points dominated by the reference contribute nothing; drop them before the
// strict hypervolume contract.
double summary_hypervolume(const std::vector<std::array<double, 2>>& points,
                           TaskId task) {
  const auto ref = hv_reference(task);
  std::vector<std::array<double, 2>> kept;
  for (const auto& p : points)
    if (p[0] >= ref[0] && p[1] >= ref[1]) kept.push_back(p);
  if (kept.empty()) return 0.0;
  return hypervolume_2d(kept, ref);
}

std::optional<double> summary_coverage(
    const std::vector<std::array<double, 2>>& points, TaskId task) {
  if (task == TaskId::Chain) return std::nullopt;
  const BanditTask bt = task == TaskId::Schaffer ? BanditTask::schaffer()
                                                 : BanditTask::fonseca_fleming();
  return front_coverage(points, true_pareto_front(bt, 200),
                        default_coverage_threshold(task));
}

void finish_output(const ExperimentConfig& config, SweepOutput& out,
                   bool conditioned_column, int clip_count = -1) {
  const auto pts = row_points(out.rows);
  out.hypervolume = summary_hypervolume(pts, config.task);
  out.coverage = summary_coverage(pts, config.task);
  out.front_csv = front_csv_text(config, out.rows, conditioned_column);
  json s;
  s["config"] = hash_hex(config_hash(config));
  s["task"] = task_name(config.task);
  s["method"] = method_name(config.method);
  s["rows"] = out.rows.size();
  s["hypervolume"] = out.hypervolume;
  if (out.coverage) s["coverage"] = *out.coverage;
  if (clip_count >= 0) s["clip_count"] = clip_count;
  out.summary_json = s.dump(2) + "\n";
}

// ---------------------------------------------------------------- run helpers

BanditTask bandit_task_of(TaskId task) {
  switch (task) {
    case TaskId::Schaffer:
      return BanditTask::schaffer();
    case TaskId::FonsecaFleming:
      return BanditTask::fonseca_fleming();
    default:
      throw ConfigError("this method requires a bandit task");
  }
}

double default_init_mean(const ExperimentConfig& config) {
  if (config.init.mean) return *config.init.mean;
  if (config.task == TaskId::Chain) return 0.0;
  const auto b = bandit_task_of(config.task).action_bounds();
  return 0.5 * (b[0] + b[1]);
}

GaussianPolicy initial_bandit_policy(const ExperimentConfig& config) {
  return GaussianPolicy::bandit({default_init_mean(config)},
                                {std::log(config.init.std_dev)});
}

EmConfig em_config_of(const ExperimentConfig& config) {
  EmConfig em;
  em.improvement = config.improvement;
  switch (config.method) {
    case MethodId::Dime:
    case MethodId::DimeMulti:
      em.improvement.mode = ImprovementMode::DiME;
      break;
    case MethodId::Ls:
      em.improvement.mode = ImprovementMode::LS;
      break;
    case MethodId::Mompo:
      em.improvement.mode = ImprovementMode::MOMPO;
      break;
    default:
      throw ConfigError("method is not an EM sweep method: " +
                        method_name(config.method));
  }
  em.projection = config.projection;
  em.mompo_epsilon_scale = config.mompo_epsilon_scale;
  return em;
}

SweepRow run_single_em(const ExperimentConfig& config, const TradeOff& tradeoff,
                       int tradeoff_index, std::uint64_t seed) {
  RngStream rng =
      RngStream(seed, "sweep").child("tradeoff-" + std::to_string(tradeoff_index));
  const EmConfig em = em_config_of(config);

  SweepRow row;
  row.method = method_name(config.method);
  row.tradeoff = tradeoff.weights();
  row.iterations = config.iterations;
  row.seed = seed;

  if (config.task == TaskId::Chain) {
    const ChainEmTask task(ChainMDP::standard());
    std::vector<GaussianPolicy> initial(
        task.num_states(), GaussianPolicy::bandit({default_init_mean(config)},
                                                  {std::log(config.init.std_dev)}));
    const auto hist =
        em_iterate(task, em, tradeoff, config.iterations, rng, initial);
    const auto& final_pols = hist.back().policies;
    // deterministic policy: one-hot at the grid action nearest each mean
    const auto& mdp = task.mdp();
    std::vector<std::vector<double>> table(
        mdp.num_states, std::vector<double>(mdp.num_actions(), 0.0));
    for (int s = 0; s < mdp.num_states; ++s)
      table[s][nearest_grid_action(mdp, final_pols[s].mean()[0])] = 1.0;
    const auto sol = solve_tabular(mdp, table);
    row.obj1 = sol.values[0][0];
    row.obj2 = sol.values[1][0];
  } else {
    const BanditTask bt = bandit_task_of(config.task);
    const BanditEmTask task(bt, config.reward_scales);
    const std::vector<GaussianPolicy> initial{initial_bandit_policy(config)};
    const auto hist =
        em_iterate(task, em, tradeoff, config.iterations, rng, initial);
    const double a = hist.back().policies[0].mean()[0];
    const auto r = bandit_reward(bt, a);
    row.obj1 = r[0];
    row.obj2 = r[1];
  }
  return row;
}

template <typename Fn>
void parallel_jobs(int count, int workers, Fn&& body) {
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic) num_threads(workers) if (workers > 1)
  for (int i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

// ---------------------------------------------------------------- public api

std::string task_name(TaskId task) {
  for (const auto& [id, name] : kTaskNames)
    if (id == task) return name;
  throw ContractViolation("bad task id");
}

std::string method_name(MethodId method) {
  for (const auto& [id, name] : kMethodNames)
    if (id == method) return name;
  throw ContractViolation("bad method id");
}

std::vector<TradeOff> TradeoffSpec::grid() const {
  if (kind == Kind::Linspace) {
    if (count < 1) throw ConfigError("tradeoffs: count must be >= 1");
    return TradeOffDistribution::linspace_scalar(lo, hi, count);
  }
  std::vector<TradeOff> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(TradeOff::of(v));
  if (out.empty()) throw ConfigError("tradeoffs: empty list");
  return out;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return parse_config_json(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["task"] = task_name(c.task);
  j["method"] = method_name(c.method);
  j["tradeoffs"] = tradeoffs_to_json(c.tradeoffs);
  j["iterations"] = c.iterations;
  j["seeds"] = c.seeds;
  j["workers"] = c.workers;
  j["improvement"] = {{"epsilon", c.improvement.epsilon},
                      {"sample_count", c.improvement.sample_count},
                      {"eta_lo", c.improvement.eta_lo},
                      {"eta_hi", c.improvement.eta_hi},
                      {"eta_tolerance", c.improvement.eta_tolerance}};
  j["projection"] = {{"beta_mean", c.projection.beta_mean},
                     {"beta_cov", c.projection.beta_cov},
                     {"dual_step_size", c.projection.dual_step_size},
                     {"step_size", c.projection.optimizer.step_size},
                     {"max_steps", c.projection.optimizer.max_steps},
                     {"gradient_tolerance", c.projection.optimizer.gradient_tolerance},
                     {"plain_gradient", c.projection.optimizer.plain_gradient},
                     {"quadratic_penalty", c.projection.quadratic_penalty},
                     {"penalty_coeff", c.projection.penalty_coeff}};
  j["mompo_epsilon_scale"] = c.mompo_epsilon_scale;
  j["reward_scales"] = c.reward_scales;
  j["init"] = json::object();
  if (c.init.mean)
    j["init"]["mean"] = *c.init.mean;
  else
    j["init"]["mean"] = nullptr;
  j["init"]["std"] = c.init.std_dev;
  j["conditioned_blocks"] = c.conditioned_blocks;
  j["offline"] = {{"objective", c.offline.objective},
                  {"eta", c.offline.eta},
                  {"steps", c.offline.steps},
                  {"step_size", c.offline.step_size},
                  {"sample_count", c.offline.sample_count},
                  {"dataset", dataset_to_json(c.offline.dataset)}};
  j["kickstart"] = {{"prior_mean", c.kickstart.prior_mean},
                    {"prior_std", c.kickstart.prior_std},
                    {"objective", c.kickstart.objective},
                    {"alpha", c.kickstart.tradeoff.alpha},
                    {"learned", c.kickstart.tradeoff.learned},
                    {"x", c.kickstart.tradeoff.x},
                    {"threshold_c", c.kickstart.tradeoff.threshold_c},
                    {"alpha_step", c.kickstart.tradeoff.step_size},
                    {"eta", c.kickstart.eta},
                    {"eta1", c.kickstart.eta1},
                    {"eta2", c.kickstart.eta2}};
  return j.dump(2) + "\n";
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  // worker count is an execution detail: outputs (including the recorded
  // hash) are identical at any worker count
  json j = json::parse(config_to_json(config));
  j.erase("workers");
  const std::string text = j.dump(2);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::array<double, 2> hv_reference(TaskId task) {
  switch (task) {
    case TaskId::Schaffer:
      return {-5.0, -5.0};
    case TaskId::FonsecaFleming:
      return {-1.1, -1.1};
    case TaskId::Chain:
      return {0.0, -101.0};
  }
  throw ContractViolation("bad task id");
}

double default_coverage_threshold(TaskId task) {
  // Fonseca-Fleming's front spans ~1.4 units of reward space, Schaffer's ~6.2;
  // thresholds keep a 20-point sweep able to cover an evenly spread front.
  return task == TaskId::FonsecaFleming ? 0.05 : 0.2;
}

SweepOutput run_sweep(const ExperimentConfig& config) {
  const auto grid = config.tradeoffs.grid();
  const int seeds = static_cast<int>(config.seeds.size());
  const int jobs = static_cast<int>(grid.size()) * seeds;
  SweepOutput out;
  out.rows.resize(jobs);
  parallel_jobs(jobs, config.workers, [&](int i) {
    const int ti = i / seeds;
    const int si = i % seeds;
    out.rows[i] = run_single_em(config, grid[ti], ti, config.seeds[si]);
  });
  finish_output(config, out, /*conditioned_column=*/false);
  return out;
}

SweepOutput run_conditioned(const ExperimentConfig& config) {
  if (config.method != MethodId::DimeMulti)
    throw ConfigError("run_conditioned requires method dime-multi");
  const BanditTask bt = bandit_task_of(config.task);
  const auto grid = config.tradeoffs.grid();
  const int seeds = static_cast<int>(config.seeds.size());
  const int n = config.improvement.sample_count;

  const TradeOffDistribution nu =
      config.tradeoffs.kind == TradeoffSpec::Kind::Linspace
          ? TradeOffDistribution::uniform_scalar(config.tradeoffs.lo,
                                                 config.tradeoffs.hi)
          : TradeOffDistribution::fixed_list(grid);

  SweepOutput out;
  out.rows.resize(static_cast<std::size_t>(seeds) * grid.size());
  parallel_jobs(seeds, config.workers, [&](int si) {
    const std::uint64_t seed = config.seeds[si];
    RngStream rng(seed, "conditioned");
    GaussianPolicy policy = GaussianPolicy::conditioned(
        1, std::log(config.init.std_dev));
    policy.mean_params()[0] = default_init_mean(config);

    for (int it = 0; it < config.iterations; ++it) {
      RngStream iter_rng = rng.child("iter-" + std::to_string(it));
      const int b_count = config.conditioned_blocks;
      std::vector<TradeOff> alphas;
      std::vector<std::vector<std::vector<double>>> actions(b_count);
      std::vector<std::vector<std::vector<double>>> q(
          2, std::vector<std::vector<double>>(b_count, std::vector<double>(n)));
      for (int b = 0; b < b_count; ++b) {
        alphas.push_back(nu.sample(iter_rng));
        actions[b] = sample_actions(policy, alphas[b], n, iter_rng);
        for (int j = 0; j < n; ++j) {
          const auto r = bandit_reward(bt, actions[b][j][0]);
          for (int k = 0; k < 2; ++k)
            q[k][b][j] = config.reward_scales[k] * r[k];
        }
      }
      // per-objective temperatures shared across the sampled trade-offs
      std::vector<ConditionedExpertBlock> blocks;
      blocks.reserve(b_count);
      for (int b = 0; b < b_count; ++b) {
        blocks.push_back({alphas[b], actions[b], {{}, {}}});
      }
      for (int k = 0; k < 2; ++k) {
        const auto temp = solve_temperature(
            q[k], config.improvement.epsilon, config.improvement.eta_lo,
            config.improvement.eta_hi, config.improvement.eta_tolerance);
        const auto w = softmax_weights(q[k], temp.eta);
        for (int b = 0; b < b_count; ++b) blocks[b].weights[k] = w[b];
      }
      policy = distill_conditioned(blocks, policy, config.projection).policy;
    }

    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      SweepRow row;
      row.method = method_name(config.method);
      row.tradeoff = grid[gi].weights();
      row.iterations = config.iterations;
      row.seed = seed;
      row.conditioned = true;
      const double a = policy.mean(grid[gi])[0];
      const auto r = bandit_reward(bt, a);
      row.obj1 = r[0];
      row.obj2 = r[1];
      out.rows[si * grid.size() + gi] = std::move(row);
    }
  });
  finish_output(config, out, /*conditioned_column=*/true);
  return out;
}

SweepOutput run_offline(const ExperimentConfig& config) {
  const BanditTask bt = bandit_task_of(config.task);
  const auto& oc = config.offline;
  if (oc.objective < 0 || oc.objective > 1)
    throw ConfigError("offline.objective must be 0 or 1");

  OfflineDataset dataset;
  if (!oc.dataset.path.empty()) {
    dataset = load_offline_dataset(oc.dataset.path);
  } else {
    if (oc.dataset.behavior.empty())
      throw ConfigError("offline.dataset needs a path or a behavior mixture");
    RngStream rng(oc.dataset.seed, "dataset");
    dataset = generate_offline_dataset(bt, BehaviorSpec{oc.dataset.behavior},
                                       oc.dataset.size, rng);
  }
  const auto q_eval = ObjectiveEvaluator::bandit(bt, oc.objective);

  // BC has no trade-off; it trains once per seed at alpha = 1
  const std::vector<TradeOff> grid = config.method == MethodId::OfflineBc
                                         ? std::vector<TradeOff>{TradeOff::scalar(1.0)}
                                         : config.tradeoffs.grid();
  const int seeds = static_cast<int>(config.seeds.size());
  const int jobs = static_cast<int>(grid.size()) * seeds;
  SweepOutput out;
  out.rows.resize(jobs);
  std::vector<int> clips(jobs, 0);

  parallel_jobs(jobs, config.workers, [&](int i) {
    const int ti = i / seeds;
    const int si = i % seeds;
    const std::uint64_t seed = config.seeds[si];
    const double alpha = grid[ti].alpha();
    RngStream rng =
        RngStream(seed, "offline").child("tradeoff-" + std::to_string(ti));

    GaussianPolicy theta = initial_bandit_policy(config);
    AdamState adam_mean(theta.mean_params().size());
    AdamState adam_ls(theta.log_std_params().size());
    int clip_total = 0;
    for (int step = 0; step < oc.steps; ++step) {
      LossResult loss;
      switch (config.method) {
        case MethodId::OfflineBc:
          loss = offline_loss_dime(dataset.batch, theta, q_eval, 1.0, oc.eta,
                                   oc.sample_count, theta, rng);
          break;
        case MethodId::OfflineCrr: {
          if (alpha >= 1.0) {
            loss = offline_loss_dime(dataset.batch, theta, q_eval, 1.0, oc.eta,
                                     oc.sample_count, theta, rng);
            break;
          }
          const double beta = alpha / (1.0 - alpha);
          const double v = eval_value_mc(theta, std::nullopt, 0, q_eval,
                                         oc.sample_count, rng);
          loss = offline_loss_ls_crr(dataset.batch, q_eval, {v}, beta, theta);
          break;
        }
        case MethodId::OfflineDimeBc:
          loss = offline_loss_dime(dataset.batch, theta, q_eval, alpha, oc.eta,
                                   oc.sample_count, theta, rng);
          break;
        case MethodId::OfflineDimeAwbc: {
          const double v = eval_value_mc(theta, std::nullopt, 0, q_eval,
                                         oc.sample_count, rng);
          loss = offline_loss_awbc(dataset.batch, q_eval, {v}, alpha, oc.eta,
                                   theta, oc.sample_count, theta, rng);
          break;
        }
        default:
          throw ConfigError("method is not an offline method: " +
                            method_name(config.method));
      }
      clip_total += loss.clip_count;
      adam_mean.descend(theta.mean_params(), loss.d_mean, oc.step_size);
      adam_ls.descend(theta.log_std_params(), loss.d_log_std, oc.step_size);
    }
    clips[i] = clip_total;

    SweepRow row;
    row.method = method_name(config.method);
    row.tradeoff = grid[ti].weights();
    row.iterations = oc.steps;
    row.seed = seed;
    const auto r = bandit_reward(bt, theta.mean()[0]);
    row.obj1 = r[0];
    row.obj2 = r[1];
    out.rows[i] = std::move(row);
  });

  int clip_count = 0;
  for (int c : clips) clip_count += c;
  finish_output(config, out, /*conditioned_column=*/false, clip_count);
  return out;
}

KickstartOutput run_kickstart(const ExperimentConfig& config) {
  if (config.method != MethodId::KickstartLs &&
      config.method != MethodId::KickstartDime)
    throw ConfigError("run_kickstart requires a kickstart method");
  const BanditTask bt = bandit_task_of(config.task);
  const auto& kc = config.kickstart;
  if (kc.objective < 0 || kc.objective > 1)
    throw ConfigError("kickstart.objective must be 0 or 1");
  const GaussianPolicy prior =
      GaussianPolicy::bandit({kc.prior_mean}, {std::log(kc.prior_std)});
  const int n = config.improvement.sample_count;
  const int seeds = static_cast<int>(config.seeds.size());

  KickstartOutput out;
  out.rows.resize(static_cast<std::size_t>(seeds) * config.iterations);
  std::vector<double> final_q(seeds, 0.0), final_alpha(seeds, 0.0);

  parallel_jobs(seeds, config.workers, [&](int si) {
    const std::uint64_t seed = config.seeds[si];
    RngStream rng(seed, "kickstart");
    GaussianPolicy theta = initial_bandit_policy(config);
    KickstartConfig state = kc.tradeoff;

    for (int it = 0; it < config.iterations; ++it) {
      RngStream iter_rng = rng.child("iter-" + std::to_string(it));
      const auto actions = sample_actions(theta, std::nullopt, n, iter_rng);
      std::vector<double> q(n), log_ratio(n);
      for (int j = 0; j < n; ++j) {
        q[j] = bandit_reward(bt, actions[j][0])[kc.objective];
        log_ratio[j] = prior.log_density(std::nullopt, actions[j]) -
                       theta.log_density(std::nullopt, actions[j]);
      }
      const double alpha_used = state.effective_alpha();
      const auto weights =
          config.method == MethodId::KickstartLs
              ? kickstart_weights_ls({q}, {log_ratio}, alpha_used, kc.eta)
              : kickstart_weights_dime({q}, {log_ratio}, alpha_used, kc.eta1,
                                       kc.eta2);

      ExpertWeights experts;
      experts.states = {0};
      experts.actions = {actions};
      experts.weights = {{weights[0]}};
      experts.iterate_id = theta.id();
      theta = distill(experts, TradeOff::of({1.0}), theta, config.projection)
                  .policy;

      double eq = 0.0;
      for (double v : q) eq += v;
      eq /= n;
      KickstartRow row;
      row.iteration = it;
      row.alpha = alpha_used;
      row.expected_q = eq;
      row.kl_to_prior = kl_gaussian(theta, prior).total;
      row.seed = seed;
      out.rows[si * config.iterations + it] = row;
      if (state.learned) state = update_learned_tradeoff(state, eq);
      if (it + 1 == config.iterations) {
        final_q[si] = eq;
        final_alpha[si] = alpha_used;
      }
    }
  });

  for (int si = 0; si < seeds; ++si) {
    out.final_expected_q += final_q[si] / seeds;
    out.final_alpha += final_alpha[si] / seeds;
  }
  std::ostringstream csv;
  csv << "# config=" << hash_hex(config_hash(config)) << "\n";
  csv << "iteration,alpha,expected_q,kl_to_prior,seed\n";
  for (const auto& r : out.rows)
    csv << r.iteration << "," << fmt(r.alpha) << "," << fmt(r.expected_q) << ","
        << fmt(r.kl_to_prior) << "," << r.seed << "\n";
  out.curve_csv = csv.str();
  return out;
}

namespace {

struct ParsedFront {
  std::vector<std::string> methods;
  std::vector<std::array<double, 2>> points;
};

ParsedFront parse_front_csv(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  int method_col = -1, obj1_col = -1, obj2_col = -1;
  ParsedFront out;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!header_seen) {
      header_seen = true;
      for (int i = 0; i < static_cast<int>(cells.size()); ++i) {
        if (cells[i] == "method") method_col = i;
        if (cells[i] == "obj_1") obj1_col = i;
        if (cells[i] == "obj_2") obj2_col = i;
      }
      if (obj1_col < 0 || obj2_col < 0)
        throw ConfigError("front CSV lacks obj_1/obj_2 columns");
      continue;
    }
    out.methods.push_back(method_col >= 0 ? cells[method_col] : "");
    out.points.push_back(
        {std::stod(cells[obj1_col]), std::stod(cells[obj2_col])});
  }
  if (!header_seen) throw ConfigError("front CSV has no header row");
  return out;
}

}  // namespace

FrontMetrics eval_front_csv(const std::string& csv_text, TaskId task,
                            double coverage_threshold) {
  const auto parsed = parse_front_csv(csv_text);
  FrontMetrics m;
  m.hypervolume = summary_hypervolume(parsed.points, task);
  m.nondominated_count = nondominated(parsed.points).size();
  if (task != TaskId::Chain) {
    const BanditTask bt = task == TaskId::Schaffer
                              ? BanditTask::schaffer()
                              : BanditTask::fonseca_fleming();
    m.coverage = front_coverage(parsed.points, true_pareto_front(bt, 200),
                                coverage_threshold);
  }
  return m;
}

std::string plot_data_csv(const std::string& front_csv, TaskId task) {
  const auto parsed = parse_front_csv(front_csv);
  std::ostringstream out;
  out << "series,obj_1,obj_2\n";
  for (std::size_t i = 0; i < parsed.points.size(); ++i)
    out << (parsed.methods[i].empty() ? "front" : parsed.methods[i]) << ","
        << fmt(parsed.points[i][0]) << "," << fmt(parsed.points[i][1]) << "\n";
  if (task != TaskId::Chain) {
    const BanditTask bt = task == TaskId::Schaffer
                              ? BanditTask::schaffer()
                              : BanditTask::fonseca_fleming();
    for (const auto& p : true_pareto_front(bt, 100))
      out << "true-front," << fmt(p[0]) << "," << fmt(p[1]) << "\n";
  }
  return out.str();
}

}  // namespace morl

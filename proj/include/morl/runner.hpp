#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "morl/behavioral.hpp"
#include "morl/projection.hpp"
#include "morl/testbeds.hpp"

namespace morl {

enum class TaskId { Schaffer, FonsecaFleming, Chain };

enum class MethodId {
  Dime,
  Ls,
  Mompo,
  DimeMulti,
  OfflineBc,
  OfflineCrr,
  OfflineDimeBc,
  OfflineDimeAwbc,
  KickstartLs,
  KickstartDime,
};

std::string task_name(TaskId task);
std::string method_name(MethodId method);

/// The trade-off grid / sampling distribution of an experiment. Linspace is
/// over the leading weight of a two-objective trade-off.
struct TradeoffSpec {
  enum class Kind { Linspace, List };
  Kind kind = Kind::Linspace;
  double lo = 0.05;
  double hi = 1.0;
  int count = 20;
  std::vector<std::vector<double>> values;  // Kind::List

  std::vector<TradeOff> grid() const;
};

/// Either a dataset file to load or a declarative generator.
struct DatasetSpec {
  std::string path;  // when nonempty, load instead of generating
  std::vector<BehaviorComponent> behavior;
  int size = 256;
  std::uint64_t seed = 7;
};

struct OfflineRunConfig {
  int objective = 0;  // task objective optimized against the prior
  double eta = 1.0;   // distillation-term temperature
  int steps = 2000;
  double step_size = 1e-2;
  int sample_count = 30;
  DatasetSpec dataset;
};

struct KickstartRunConfig {
  double prior_mean = 2.0;
  double prior_std = 0.3;
  int objective = 0;
  KickstartConfig tradeoff;
  double eta = 1.0;   // combined-exponent temperature
  double eta1 = 1.0;  // task expert temperature (mixture form)
  double eta2 = 1.0;  // prior expert temperature (mixture form)
};

struct InitConfig {
  std::optional<double> mean;  // default: center of the task's action bounds
  double std_dev = 1.0;
};

struct ExperimentConfig {
  TaskId task = TaskId::Schaffer;
  MethodId method = MethodId::Dime;
  TradeoffSpec tradeoffs;
  int iterations = 200;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int workers = 1;
  ImprovementConfig improvement;  // mode is derived from method at run time
  ProjectionConfig projection;
  double mompo_epsilon_scale = 0.2;
  std::array<double, 2> reward_scales{1.0, 1.0};
  InitConfig init;
  int conditioned_blocks = 8;  // trade-offs resampled per conditioned update
  OfflineRunConfig offline;
  KickstartRunConfig kickstart;
};

/// Parses the declarative config. Unknown keys anywhere are hard errors
/// (ConfigError).
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig parse_config_file(const std::string& path);

/// Canonical serialized form; parse(config_to_json(c)) reproduces c exactly.
std::string config_to_json(const ExperimentConfig& config);

/// FNV-1a over the canonical serialization; recorded in every output.
std::uint64_t config_hash(const ExperimentConfig& config);

struct SweepRow {
  std::string method;
  std::vector<double> tradeoff;
  double obj1 = 0.0;
  double obj2 = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;
  bool conditioned = false;
};

struct SweepOutput {
  std::vector<SweepRow> rows;
  double hypervolume = 0.0;
  std::optional<double> coverage;  // only for tasks with a known true front
  std::string front_csv;           // exact output bytes
  std::string summary_json;
};

/// One EM run per (trade-off, seed), parallel across jobs, deterministic
/// independent of worker count.
SweepOutput run_sweep(const ExperimentConfig& config);

/// Trains one trade-off-conditioned policy per seed; evaluates on the config
/// grid. Rows carry conditioned = 1.
SweepOutput run_conditioned(const ExperimentConfig& config);

/// Offline training over the trade-off grid against the configured dataset.
SweepOutput run_offline(const ExperimentConfig& config);

struct KickstartRow {
  int iteration = 0;
  double alpha = 0.0;
  double expected_q = 0.0;
  double kl_to_prior = 0.0;
  std::uint64_t seed = 0;
};

struct KickstartOutput {
  std::vector<KickstartRow> rows;
  std::string curve_csv;
  double final_expected_q = 0.0;  // mean over seeds, last iteration
  double final_alpha = 0.0;
};

KickstartOutput run_kickstart(const ExperimentConfig& config);

struct FrontMetrics {
  double hypervolume = 0.0;
  std::optional<double> coverage;
  std::size_t nondominated_count = 0;
};

/// Recomputes front metrics from a written front CSV.
FrontMetrics eval_front_csv(const std::string& csv_text, TaskId task,
                            double coverage_threshold);

/// Per-figure plotting table: series,obj_1,obj_2 rows for each method plus the
/// analytic front where one exists.
std::string plot_data_csv(const std::string& front_csv, TaskId task);

/// Reference point for summary hypervolumes.
std::array<double, 2> hv_reference(TaskId task);

/// Coverage threshold used in summaries (task-scaled).
double default_coverage_threshold(TaskId task);

}  // namespace morl

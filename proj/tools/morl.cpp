#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "morl/errors.hpp"
#include "morl/runner.hpp"

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw morl::ConfigError("cannot write output file: " + path.string());
  f << text;
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::string front_path;  // eval-front / plot-data input
  std::int64_t seed = -1;
  int workers = 0;
  std::string method;
};

morl::ExperimentConfig load_config(const CommonArgs& args) {
  auto config = morl::parse_config_file(args.config_path);
  if (args.seed >= 0) config.seeds = {static_cast<std::uint64_t>(args.seed)};
  if (args.workers > 0) config.workers = args.workers;
  if (!args.method.empty()) {
    // reparse through the canonical form so the override is validated
    auto j = morl::config_to_json(config);
    const std::string needle = "\"method\": \"" + method_name(config.method) + "\"";
    const auto pos = j.find(needle);
    j.replace(pos, needle.size(), "\"method\": \"" + args.method + "\"");
    config = morl::parse_config(j);
  }
  return config;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw morl::ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-objective policy optimization runner"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string command;
  for (const char* name :
       {"sweep", "conditioned", "offline", "kickstart", "eval-front",
        "plot-data"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", args.config_path, "experiment config path")
        ->required();
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--seed", args.seed, "single-seed override");
    sub->add_option("--workers", args.workers, "worker count override");
    sub->add_option("--method", args.method, "method override");
    if (std::string(name) == "eval-front" || std::string(name) == "plot-data")
      sub->add_option("--front", args.front_path, "front CSV to read")
          ->required();
    sub->callback([&command, name] { command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const auto config = load_config(args);
    const std::filesystem::path out_dir(args.out_dir);
    if (command == "sweep") {
      const auto out = morl::run_sweep(config);
      write_file(out_dir / "front.csv", out.front_csv);
      write_file(out_dir / "summary.json", out.summary_json);
    } else if (command == "conditioned") {
      const auto out = morl::run_conditioned(config);
      write_file(out_dir / "front.csv", out.front_csv);
      write_file(out_dir / "summary.json", out.summary_json);
    } else if (command == "offline") {
      const auto out = morl::run_offline(config);
      write_file(out_dir / "front.csv", out.front_csv);
      write_file(out_dir / "summary.json", out.summary_json);
    } else if (command == "kickstart") {
      const auto out = morl::run_kickstart(config);
      write_file(out_dir / "curve.csv", out.curve_csv);
    } else if (command == "eval-front") {
      const auto metrics = morl::eval_front_csv(
          read_file(args.front_path), config.task,
          morl::default_coverage_threshold(config.task));
      std::ostringstream ss;
      ss << "{\n  \"hypervolume\": " << metrics.hypervolume
         << ",\n  \"nondominated\": " << metrics.nondominated_count;
      if (metrics.coverage) ss << ",\n  \"coverage\": " << *metrics.coverage;
      ss << "\n}\n";
      write_file(out_dir / "metrics.json", ss.str());
    } else if (command == "plot-data") {
      write_file(out_dir / "plot.csv",
                 morl::plot_data_csv(read_file(args.front_path), config.task));
    }
  } catch (const morl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const morl::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

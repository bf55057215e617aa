// Benchmarks the trade-off sweep serial (1 worker) against the OpenMP path and
// checks the outputs are byte-identical.
#include <chrono>
#include <iostream>
#include <string>

#include <omp.h>

#include "morl/runner.hpp"

namespace {

double time_run(morl::ExperimentConfig config, int workers, std::string* csv) {
  config.workers = workers;
  const auto start = std::chrono::steady_clock::now();
  const auto out = morl::run_sweep(config);
  const auto end = std::chrono::steady_clock::now();
  *csv = out.front_csv;
  return std::chrono::duration<double>(end - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  morl::ExperimentConfig config;
  if (argc > 1) {
    config = morl::parse_config_file(argv[1]);
  } else {
    config.task = morl::TaskId::Schaffer;
    config.method = morl::MethodId::Dime;
    config.iterations = 30;
    config.seeds = {1, 2};
  }

  const int max_workers = omp_get_max_threads();
  std::string serial_csv, parallel_csv;
  const double t_serial = time_run(config, 1, &serial_csv);
  const double t_parallel = time_run(config, max_workers, &parallel_csv);

  std::cout << "jobs: " << config.tradeoffs.grid().size() * config.seeds.size()
            << "\n";
  std::cout << "serial (1 worker):      " << t_serial << " s\n";
  std::cout << "parallel (" << max_workers << " workers): " << t_parallel
            << " s\n";
  std::cout << "speedup: " << t_serial / t_parallel << "x\n";
  if (serial_csv != parallel_csv) {
    std::cout << "FAIL: outputs differ between worker counts\n";
    return 1;
  }
  std::cout << "outputs byte-identical across worker counts\n";
  return 0;
}

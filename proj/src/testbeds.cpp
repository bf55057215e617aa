#include "morl/testbeds.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "morl/errors.hpp"

namespace morl {

std::array<double, 2> BanditTask::action_bounds() const {
  return function == BanditFunction::Schaffer ? std::array<double, 2>{-3.0, 5.0}
                                              : std::array<double, 2>{-3.0, 3.0};
}

std::array<double, 2> BanditTask::optimal_action_interval() const {
  return function == BanditFunction::Schaffer ? std::array<double, 2>{0.0, 2.0}
                                              : std::array<double, 2>{-1.0, 1.0};
}

std::string BanditTask::name() const {
  return function == BanditFunction::Schaffer ? "schaffer" : "fonseca-fleming";
}

std::array<double, 2> bandit_reward(const BanditTask& task, double action) {
  if (!std::isfinite(action)) throw ContractViolation("non-finite bandit action");
  if (task.function == BanditFunction::Schaffer) {
    const double f1 = action * action;
    const double f2 = (action - 2.0) * (action - 2.0);
    return {-f1, -f2};
  }
  const double d1 = action - 1.0;
  const double d2 = action + 1.0;
  return {-(1.0 - std::exp(-d1 * d1)), -(1.0 - std::exp(-d2 * d2))};
}

std::vector<std::array<double, 2>> true_pareto_front(const BanditTask& task,
                                                     int resolution) {
  if (resolution < 10) throw ContractViolation("front resolution must be >= 10");
  const auto [lo, hi] = task.optimal_action_interval();
  std::vector<std::array<double, 2>> out;
  out.reserve(resolution);
  for (int i = 0; i < resolution; ++i) {
    const double a = lo + (hi - lo) * static_cast<double>(i) / (resolution - 1);
    out.push_back(bandit_reward(task, a));
  }
  return out;
}

ChainMDP ChainMDP::standard(int num_states, int num_actions, double gamma) {
  if (num_states < 2 || num_actions < 2)
    throw ContractViolation("chain needs >= 2 states and actions");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw ContractViolation("chain requires gamma in [0, 1)");
  ChainMDP mdp;
  mdp.num_states = num_states;
  mdp.gamma = gamma;
  mdp.action_grid.resize(num_actions);
  for (int a = 0; a < num_actions; ++a)
    mdp.action_grid[a] = -1.0 + 2.0 * static_cast<double>(a) / (num_actions - 1);

  mdp.transitions.assign(
      num_states, std::vector<std::vector<double>>(
                      num_actions, std::vector<double>(num_states, 0.0)));
  mdp.rewards.assign(2, std::vector<std::vector<double>>(
                            num_states, std::vector<double>(num_actions, 0.0)));
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      const double act = mdp.action_grid[a];
      const double p_up = (1.0 + act) / 2.0;  // chance of advancing
      const int next = std::min(s + 1, num_states - 1);
      mdp.transitions[s][a][next] += p_up;
      mdp.transitions[s][a][s] += 1.0 - p_up;
      mdp.rewards[0][s][a] = p_up;             // progress
      mdp.rewards[1][s][a] = -std::abs(act);   // action-magnitude penalty
    }
  }
  return mdp;
}

double BehaviorSpec::sample(RngStream& rng) const {
  if (components.empty()) throw ContractViolation("empty behavior mixture");
  double total = 0.0;
  for (const auto& c : components) total += c.weight;
  double u = rng.uniform() * total;
  const BehaviorComponent* chosen = &components.back();
  for (const auto& c : components) {
    if (u < c.weight) {
      chosen = &c;
      break;
    }
    u -= c.weight;
  }
  return chosen->mean + chosen->std_dev * rng.normal();
}

std::string BehaviorSpec::describe() const {
  std::ostringstream ss;
  ss << "mixture[";
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (i) ss << " + ";
    ss << components[i].weight << "*N(" << components[i].mean << ","
       << components[i].std_dev << ")";
  }
  ss << "]";
  return ss.str();
}

OfflineDataset generate_offline_dataset(const BanditTask& task,
                                        const BehaviorSpec& behavior, int size,
                                        RngStream& rng) {
  if (size < 1) throw ContractViolation("dataset size must be >= 1");
  OfflineDataset out;
  out.behavior_description = behavior.describe();
  out.seed = rng.seed();
  out.batch.transitions.reserve(size);
  for (int i = 0; i < size; ++i) {
    Transition t;
    t.state = 0;
    t.next_state = 0;
    const double a = behavior.sample(rng);
    t.action = {a};
    const auto r = bandit_reward(task, a);
    t.rewards = {r[0], r[1]};
    out.batch.transitions.push_back(std::move(t));
  }
  return out;
}

void save_offline_dataset(const OfflineDataset& dataset, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ContractViolation("cannot open dataset file for writing: " + path);
  f << "# behavior=" << dataset.behavior_description
    << " seed=" << dataset.seed << "\n";
  f << "state,action,r_1,r_2,next_state\n";
  f.precision(17);
  for (const auto& t : dataset.batch.transitions) {
    f << t.state << "," << t.action[0] << "," << t.rewards[0] << ","
      << t.rewards[1] << "," << t.next_state << "\n";
  }
}

OfflineDataset load_offline_dataset(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ContractViolation("cannot open dataset file: " + path);
  OfflineDataset out;
  std::string line;
  if (!std::getline(f, line) || line.rfind("# behavior=", 0) != 0)
    throw ContractViolation("bad dataset header in " + path);
  const auto seed_pos = line.rfind(" seed=");
  out.behavior_description =
      line.substr(11, seed_pos == std::string::npos ? std::string::npos
                                                    : seed_pos - 11);
  if (seed_pos != std::string::npos)
    out.seed = std::stoull(line.substr(seed_pos + 6));
  std::getline(f, line);  // column header
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    Transition t;
    char comma;
    double action, r1, r2;
    ss >> t.state >> comma >> action >> comma >> r1 >> comma >> r2 >> comma >>
        t.next_state;
    if (!ss) throw ContractViolation("bad dataset row in " + path);
    t.action = {action};
    t.rewards = {r1, r2};
    out.batch.transitions.push_back(std::move(t));
  }
  return out;
}

}  // namespace morl

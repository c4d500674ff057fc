#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "learnmmd/protocol.hpp"
#include "learnmmd/serialize.hpp"

namespace learnmmd {

// Every problem found in a configuration, reported together.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct Sweep {
  std::string axis;  // n_per_mode (blob), n_total or d (hdgm)
  std::vector<int> values;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  DatasetSpec dataset;
  std::vector<std::string> methods = {"mmd-d"};
  Json train = Json::object();  // overrides applied to every method
  std::map<std::string, Json> method_train;  // per-method overrides, applied after `train`
  TestSettings test;
  std::optional<Sweep> sweep;
  std::vector<double> mkl_multipliers = {0.25, 0.5, 1.0, 2.0, 4.0};
  int me_candidates = 200;
  int threads = 1;

  // Dataset for one sweep point (the configured dataset when there is no sweep).
  DatasetSpec dataset_at(int sweep_value) const;
  std::vector<int> sweep_values() const;  // {0} when there is no sweep
  // Method settings with dataset-dependent defaults filled in; throws ConfigError.
  MethodSpec resolve_method(const std::string& name, const DatasetSpec& dataset) const;

  Json to_json() const;
};

// Throws ConfigError listing every problem.
ExperimentConfig parse_experiment_config(const Json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Applies keys of `j` to `config`; problems are appended to `errors` with `where` as prefix.
void apply_train_json(const Json& j, TrainConfig& config, std::vector<std::string>& errors, const std::string& where);
Json train_config_to_json(const TrainConfig& config);
Json dataset_to_json(const DatasetSpec& dataset);
Json test_settings_to_json(const TestSettings& settings);

// Recursive object merge; values in `patch` win.
void merge_json(Json& base, const Json& patch);

}  // namespace learnmmd

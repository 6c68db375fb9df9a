#ifndef SIGRE_CONFIG_HPP
#define SIGRE_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sigre/simulators.hpp"

namespace sigre {

// --- minimal TOML reader (sections, scalar keys, flat arrays, # comments) ---

struct TomlValue {
  enum class Kind { String, Number, Boolean, Array };
  Kind kind = Kind::Number;
  std::string str;
  double num = 0.0;
  bool boolean = false;
  std::vector<TomlValue> array;

  double as_number() const;
  bool as_bool() const;
  const std::string& as_string() const;
  std::vector<double> as_numbers() const;
  std::vector<std::string> as_strings() const;
};

/// Keys are flattened as "section.key".
using TomlTable = std::map<std::string, TomlValue>;

TomlTable toml_parse(const std::string& text);

// --- experiment configuration ---

struct ExperimentConfig {
  ModelKind model = ModelKind::Ou;
  std::vector<std::string> methods = {"signature", "k2"};
  std::vector<int> budgets = {100, 250, 500};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string out_dir = "results";

  int tuning_trials = 30;
  int cv_folds = 5;
  std::size_t q_override = 0;  // 0 applies the q = B_min (K+1) rule

  int dyadic_order = 2;
  bool normalize = false;
  bool time_augment = true;

  int mh_trial_steps = 50000;
  int mh_main_steps = 100000;
  int mh_thin = 100;

  std::size_t sir_prior_draws = 50000;
  std::size_t sir_resample_draws = 1000;

  std::size_t smc_budget = 100000;
  std::size_t smc_population = 500;
  double smc_decay = 0.8;

  std::size_t metric_cap = 1000;
  int bootstrap_replicates = 10000;

  void validate() const;
  int b_min() const { return budgets.front(); }

  std::string to_toml() const;
  static ExperimentConfig from_toml(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  void save(const std::string& path) const;

  /// Content hash over the canonical TOML text.
  std::string hash() const;
};

}  // namespace sigre

#endif

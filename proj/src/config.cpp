#include "sigre/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace sigre {

double TomlValue::as_number() const {
  if (kind != Kind::Number) throw InvalidArgument("toml: expected a number");
  return num;
}

bool TomlValue::as_bool() const {
  if (kind != Kind::Boolean) throw InvalidArgument("toml: expected a boolean");
  return boolean;
}

const std::string& TomlValue::as_string() const {
  if (kind != Kind::String) throw InvalidArgument("toml: expected a string");
  return str;
}

std::vector<double> TomlValue::as_numbers() const {
  if (kind != Kind::Array) throw InvalidArgument("toml: expected an array");
  std::vector<double> out;
  out.reserve(array.size());
  for (const auto& v : array) out.push_back(v.as_number());
  return out;
}

std::vector<std::string> TomlValue::as_strings() const {
  if (kind != Kind::Array) throw InvalidArgument("toml: expected an array");
  std::vector<std::string> out;
  out.reserve(array.size());
  for (const auto& v : array) out.push_back(v.as_string());
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

TomlValue parse_scalar(const std::string& text) {
  TomlValue v;
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') {
    v.kind = TomlValue::Kind::String;
    v.str = text.substr(1, text.size() - 2);
    return v;
  }
  if (text == "true" || text == "false") {
    v.kind = TomlValue::Kind::Boolean;
    v.boolean = text == "true";
    return v;
  }
  char* end = nullptr;
  const double num = std::strtod(text.c_str(), &end);
  if (end && *end == '\0' && end != text.c_str()) {
    v.kind = TomlValue::Kind::Number;
    v.num = num;
    return v;
  }
  throw InvalidArgument("toml: cannot parse value: " + text);
}

TomlValue parse_value(const std::string& text) {
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') throw InvalidArgument("toml: unterminated array");
    TomlValue v;
    v.kind = TomlValue::Kind::Array;
    const std::string inner = text.substr(1, text.size() - 2);
    std::string cell;
    bool quoted = false;
    for (const char c : inner) {
      if (c == '"') quoted = !quoted;
      if (c == ',' && !quoted) {
        const std::string t = trim(cell);
        if (!t.empty()) v.array.push_back(parse_scalar(t));
        cell.clear();
      } else {
        cell += c;
      }
    }
    const std::string t = trim(cell);
    if (!t.empty()) v.array.push_back(parse_scalar(t));
    return v;
  }
  return parse_scalar(text);
}

}  // namespace

TomlTable toml_parse(const std::string& text) {
  TomlTable table;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw InvalidArgument("toml: bad section header at line " + std::to_string(line_no));
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("toml: expected key = value at line " + std::to_string(line_no));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw InvalidArgument("toml: empty key or value at line " + std::to_string(line_no));
    }
    const std::string full = section.empty() ? key : section + "." + key;
    table[full] = parse_value(value);
  }
  return table;
}

// --- experiment config ---

void ExperimentConfig::validate() const {
  if (methods.empty()) throw InvalidArgument("config: methods must be nonempty");
  if (budgets.empty()) throw InvalidArgument("config: budgets must be nonempty");
  if (!std::is_sorted(budgets.begin(), budgets.end())) {
    throw InvalidArgument("config: budgets must be ascending");
  }
  if (budgets.front() < 4) throw InvalidArgument("config: smallest budget too small");
  if (seeds.empty()) throw InvalidArgument("config: seeds must be nonempty");
  if (tuning_trials < 1 || cv_folds < 2) throw InvalidArgument("config: bad tuning settings");
  if (mh_main_steps % mh_thin != 0) throw InvalidArgument("config: thin must divide main steps");
  if (!(smc_decay > 0.0 && smc_decay < 1.0)) throw InvalidArgument("config: smc decay in (0,1)");
}

namespace {

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <typename T>
std::string fmt_array(const std::vector<T>& values) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os << ", ";
    os << values[i];
  }
  os << "]";
  return os.str();
}

std::string fmt_string_array(const std::vector<std::string>& values) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os << ", ";
    os << '"' << values[i] << '"';
  }
  os << "]";
  return os.str();
}

std::uint64_t fnv1a_str(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::string ExperimentConfig::to_toml() const {
  std::ostringstream os;
  os << "[experiment]\n";
  os << "model = \"" << to_string(model) << "\"\n";
  os << "methods = " << fmt_string_array(methods) << "\n";
  os << "budgets = " << fmt_array(budgets) << "\n";
  os << "seeds = " << fmt_array(seeds) << "\n";
  os << "out_dir = \"" << out_dir << "\"\n";
  os << "\n[tuning]\n";
  os << "trials = " << tuning_trials << "\n";
  os << "folds = " << cv_folds << "\n";
  os << "q = " << q_override << "\n";
  os << "\n[kernel]\n";
  os << "dyadic_order = " << dyadic_order << "\n";
  os << "normalize = " << (normalize ? "true" : "false") << "\n";
  os << "time_augment = " << (time_augment ? "true" : "false") << "\n";
  os << "\n[mh]\n";
  os << "trial_steps = " << mh_trial_steps << "\n";
  os << "main_steps = " << mh_main_steps << "\n";
  os << "thin = " << mh_thin << "\n";
  os << "\n[sir]\n";
  os << "prior_draws = " << sir_prior_draws << "\n";
  os << "resample_draws = " << sir_resample_draws << "\n";
  os << "\n[reference]\n";
  os << "smc_budget = " << smc_budget << "\n";
  os << "smc_population = " << smc_population << "\n";
  os << "smc_decay = " << fmt_num(smc_decay) << "\n";
  os << "\n[metrics]\n";
  os << "cap = " << metric_cap << "\n";
  os << "bootstrap_replicates = " << bootstrap_replicates << "\n";
  return os.str();
}

ExperimentConfig ExperimentConfig::from_toml(const std::string& text) {
  const TomlTable t = toml_parse(text);
  ExperimentConfig cfg;
  const auto get = [&t](const std::string& key) -> const TomlValue* {
    const auto it = t.find(key);
    return it == t.end() ? nullptr : &it->second;
  };
  if (const auto* v = get("experiment.model")) cfg.model = model_kind_from_string(v->as_string());
  if (const auto* v = get("experiment.methods")) cfg.methods = v->as_strings();
  if (const auto* v = get("experiment.budgets")) {
    cfg.budgets.clear();
    for (const double b : v->as_numbers()) cfg.budgets.push_back(static_cast<int>(b));
  }
  if (const auto* v = get("experiment.seeds")) {
    cfg.seeds.clear();
    for (const double s : v->as_numbers()) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (const auto* v = get("experiment.out_dir")) cfg.out_dir = v->as_string();
  if (const auto* v = get("tuning.trials")) cfg.tuning_trials = static_cast<int>(v->as_number());
  if (const auto* v = get("tuning.folds")) cfg.cv_folds = static_cast<int>(v->as_number());
  if (const auto* v = get("tuning.q")) cfg.q_override = static_cast<std::size_t>(v->as_number());
  if (const auto* v = get("kernel.dyadic_order")) cfg.dyadic_order = static_cast<int>(v->as_number());
  if (const auto* v = get("kernel.normalize")) cfg.normalize = v->as_bool();
  if (const auto* v = get("kernel.time_augment")) cfg.time_augment = v->as_bool();
  if (const auto* v = get("mh.trial_steps")) cfg.mh_trial_steps = static_cast<int>(v->as_number());
  if (const auto* v = get("mh.main_steps")) cfg.mh_main_steps = static_cast<int>(v->as_number());
  if (const auto* v = get("mh.thin")) cfg.mh_thin = static_cast<int>(v->as_number());
  if (const auto* v = get("sir.prior_draws")) cfg.sir_prior_draws = static_cast<std::size_t>(v->as_number());
  if (const auto* v = get("sir.resample_draws")) cfg.sir_resample_draws = static_cast<std::size_t>(v->as_number());
  if (const auto* v = get("reference.smc_budget")) cfg.smc_budget = static_cast<std::size_t>(v->as_number());
  if (const auto* v = get("reference.smc_population")) cfg.smc_population = static_cast<std::size_t>(v->as_number());
  if (const auto* v = get("reference.smc_decay")) cfg.smc_decay = v->as_number();
  if (const auto* v = get("metrics.cap")) cfg.metric_cap = static_cast<std::size_t>(v->as_number());
  if (const auto* v = get("metrics.bootstrap_replicates")) {
    cfg.bootstrap_replicates = static_cast<int>(v->as_number());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open config: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return from_toml(ss.str());
}

void ExperimentConfig::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw Error("cannot open for writing: " + path);
  f << to_toml();
}

std::string ExperimentConfig::hash() const {
  // the output location is not part of the experiment's identity
  ExperimentConfig canonical = *this;
  canonical.out_dir = "";
  std::ostringstream os;
  os << std::hex << fnv1a_str(canonical.to_toml());
  return os.str();
}

}  // namespace sigre

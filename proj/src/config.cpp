#include "learnmmd/config.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace learnmmd {

namespace {

std::string join(const std::vector<std::string>& errors) {
  std::ostringstream out;
  out << "invalid configuration:";
  for (const auto& e : errors) out << "\n  - " << e;
  return out.str();
}

// Typed access to an optional key, recording type problems instead of throwing.
struct Reader {
  const Json& j;
  std::vector<std::string>& errors;
  std::string where;

  std::string path(const std::string& key) const { return where.empty() ? key : where + "." + key; }

  void check_keys(const std::set<std::string>& allowed) const {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!allowed.count(it.key())) errors.push_back("unknown key '" + path(it.key()) + "'");
    }
  }

  template <typename T>
  bool get(const std::string& key, T& out) const {
    if (!j.contains(key)) return false;
    const Json& v = j.at(key);
    bool ok = false;
    if constexpr (std::is_same_v<T, bool>) {
      ok = v.is_boolean();
    } else if constexpr (std::is_same_v<T, std::string>) {
      ok = v.is_string();
    } else if constexpr (std::is_integral_v<T>) {
      ok = v.is_number_integer() && (std::is_signed_v<T> || v.is_number_unsigned() || v.get<long long>() >= 0);
    } else if constexpr (std::is_floating_point_v<T>) {
      ok = v.is_number();
    } else {
      ok = true;
    }
    if (!ok) {
      errors.push_back("'" + path(key) + "' has the wrong type");
      return false;
    }
    try {
      out = v.get<T>();
    } catch (const std::exception&) {
      errors.push_back("'" + path(key) + "' has the wrong type");
      return false;
    }
    return true;
  }
};

DatasetVariant variant_from(const std::string& s, std::vector<std::string>& errors, const std::string& where) {
  if (s == "S" || s == "s" || s == "same") return DatasetVariant::Same;
  if (s == "D" || s == "d" || s == "different") return DatasetVariant::Different;
  errors.push_back("'" + where + "' must be S or D, got '" + s + "'");
  return DatasetVariant::Different;
}

std::string variant_name(DatasetVariant v) { return v == DatasetVariant::Same ? "S" : "D"; }

DatasetSpec parse_dataset(const Json& j, std::vector<std::string>& errors) {
  DatasetSpec d;
  if (!j.is_object()) {
    errors.push_back("'dataset' must be an object");
    return d;
  }
  Reader r{j, errors, "dataset"};
  std::string type;
  if (!r.get("type", type)) {
    errors.push_back("'dataset.type' is required (blob, hdgm or csv)");
    return d;
  }
  try {
    d.kind = parse_dataset_kind(type);
  } catch (const std::invalid_argument& e) {
    errors.push_back(std::string("dataset.type: ") + e.what());
    return d;
  }
  std::string variant;
  switch (d.kind) {
    case DatasetKind::Blob: {
      r.check_keys({"type", "variant", "n_per_mode", "assignment", "delta_scale"});
      if (r.get("variant", variant)) d.blob.variant = variant_from(variant, errors, "dataset.variant");
      r.get("n_per_mode", d.blob.n_per_mode);
      r.get("delta_scale", d.blob.delta_scale);
      std::string assignment;
      if (r.get("assignment", assignment)) {
        if (assignment == "exact") {
          d.blob.assignment = ModeAssignment::ExactPerMode;
        } else if (assignment == "multinomial") {
          d.blob.assignment = ModeAssignment::Multinomial;
        } else {
          errors.push_back("'dataset.assignment' must be exact or multinomial");
        }
      }
      if (d.blob.n_per_mode < 1) errors.push_back("'dataset.n_per_mode' must be >= 1");
      break;
    }
    case DatasetKind::Hdgm:
      r.check_keys({"type", "variant", "d", "n_total"});
      if (r.get("variant", variant)) d.hdgm.variant = variant_from(variant, errors, "dataset.variant");
      r.get("d", d.hdgm.d);
      r.get("n_total", d.hdgm.n_total);
      if (d.hdgm.d < 2) errors.push_back("'dataset.d' must be >= 2");
      if (d.hdgm.n_total < 2) errors.push_back("'dataset.n_total' must be >= 2");
      break;
    case DatasetKind::Csv: {
      r.check_keys({"type", "p", "q", "delimiter", "header", "train_fraction", "eval_size"});
      std::string p, q, delim;
      if (r.get("p", p)) d.csv_p = p; else errors.push_back("'dataset.p' (CSV path) is required");
      if (r.get("q", q)) d.csv_q = q; else errors.push_back("'dataset.q' (CSV path) is required");
      if (r.get("delimiter", delim)) {
        if (delim.size() == 1) d.delimiter = delim[0]; else errors.push_back("'dataset.delimiter' must be one character");
      }
      r.get("header", d.header);
      r.get("train_fraction", d.train_fraction);
      long long eval_size = 0;
      if (r.get("eval_size", eval_size)) d.eval_size = static_cast<Index>(eval_size);
      if (!(d.train_fraction > 0.0 && d.train_fraction < 1.0)) errors.push_back("'dataset.train_fraction' must lie in (0, 1)");
      if (d.eval_size < 0) errors.push_back("'dataset.eval_size' must be >= 0");
      break;
    }
  }
  return d;
}

TestSettings parse_test(const Json& j, std::vector<std::string>& errors) {
  TestSettings t;
  if (!j.is_object()) {
    errors.push_back("'test' must be an object");
    return t;
  }
  Reader r{j, errors, "test"};
  r.check_keys({"n_perm", "alpha", "n_eval_sets", "n_repeats", "smoothed_pvalue"});
  r.get("n_perm", t.n_perm);
  r.get("alpha", t.alpha);
  r.get("n_eval_sets", t.n_eval_sets);
  r.get("n_repeats", t.n_repeats);
  r.get("smoothed_pvalue", t.smoothed_pvalue);
  if (t.n_perm < 1) errors.push_back("'test.n_perm' must be >= 1");
  if (!(t.alpha > 0.0 && t.alpha < 1.0)) errors.push_back("'test.alpha' must lie in (0, 1)");
  if (t.n_eval_sets < 1) errors.push_back("'test.n_eval_sets' must be >= 1");
  if (t.n_repeats < 1) errors.push_back("'test.n_repeats' must be >= 1");
  return t;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors) : std::invalid_argument(join(errors)), errors_(std::move(errors)) {}

void merge_json(Json& base, const Json& patch) {
  if (!base.is_object() || !patch.is_object()) {
    base = patch;
    return;
  }
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    if (base.contains(it.key()) && base[it.key()].is_object() && it.value().is_object()) {
      merge_json(base[it.key()], it.value());
    } else {
      base[it.key()] = it.value();
    }
  }
}

void apply_train_json(const Json& j, TrainConfig& c, std::vector<std::string>& errors, const std::string& where) {
  if (!j.is_object()) {
    errors.push_back("'" + where + "' must be an object");
    return;
  }
  Reader r{j, errors, where};
  r.check_keys({"objective", "kernel_variant", "epochs", "batch_size", "learning_rate", "lambda", "hidden_dim",
                "output_dim", "depth", "epsilon_param", "initial_epsilon", "grid_init", "grid_multipliers", "q_grid_init",
                "posthoc_epochs", "posthoc_learning_rate", "max_seconds"});
  std::string s;
  if (r.get("objective", s)) {
    try {
      c.objective = parse_objective(s);
    } catch (const std::invalid_argument& e) {
      errors.push_back(where + ".objective: " + e.what());
    }
  }
  if (r.get("kernel_variant", s)) {
    try {
      c.variant = parse_kernel_family(s);
    } catch (const std::invalid_argument& e) {
      errors.push_back(where + ".kernel_variant: " + e.what());
    }
  }
  r.get("epochs", c.epochs);
  r.get("batch_size", c.batch_size);
  r.get("learning_rate", c.learning_rate);
  r.get("lambda", c.lambda);
  r.get("hidden_dim", c.hidden_dim);
  r.get("output_dim", c.output_dim);
  r.get("depth", c.depth);
  if (r.get("epsilon_param", s)) {
    if (s == "logistic") {
      c.epsilon_param = EpsilonParam::Logistic;
    } else if (s == "exp") {
      c.epsilon_param = EpsilonParam::Exp;
    } else {
      errors.push_back("'" + where + ".epsilon_param' must be logistic or exp");
    }
  }
  r.get("initial_epsilon", c.initial_epsilon);
  r.get("grid_init", c.grid_init);
  r.get("q_grid_init", c.q_grid_init);
  if (j.contains("grid_multipliers")) {
    if (j.at("grid_multipliers").is_array()) {
      c.grid_multipliers.clear();
      for (const auto& v : j.at("grid_multipliers")) {
        if (v.is_number()) {
          c.grid_multipliers.push_back(v.get<double>());
        } else {
          errors.push_back("'" + where + ".grid_multipliers' must hold numbers");
          break;
        }
      }
    } else {
      errors.push_back("'" + where + ".grid_multipliers' must be an array");
    }
  }
  r.get("posthoc_epochs", c.posthoc_epochs);
  r.get("posthoc_learning_rate", c.posthoc_learning_rate);
  r.get("max_seconds", c.max_seconds);
}

Json train_config_to_json(const TrainConfig& c) {
  return {{"objective", to_string(c.objective)},
          {"kernel_variant", to_string(c.variant)},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"lambda", c.lambda},
          {"hidden_dim", c.hidden_dim},
          {"output_dim", c.output_dim},
          {"depth", c.depth},
          {"epsilon_param", c.epsilon_param == EpsilonParam::Logistic ? "logistic" : "exp"},
          {"initial_epsilon", c.initial_epsilon},
          {"grid_init", c.grid_init},
          {"grid_multipliers", c.grid_multipliers},
          {"q_grid_init", c.q_grid_init},
          {"posthoc_epochs", c.posthoc_epochs},
          {"posthoc_learning_rate", c.posthoc_learning_rate},
          {"max_seconds", c.max_seconds}};
}

Json dataset_to_json(const DatasetSpec& d) {
  switch (d.kind) {
    case DatasetKind::Blob:
      return {{"type", "blob"},
              {"variant", variant_name(d.blob.variant)},
              {"n_per_mode", d.blob.n_per_mode},
              {"assignment", d.blob.assignment == ModeAssignment::ExactPerMode ? "exact" : "multinomial"},
              {"delta_scale", d.blob.delta_scale}};
    case DatasetKind::Hdgm:
      return {{"type", "hdgm"}, {"variant", variant_name(d.hdgm.variant)}, {"d", d.hdgm.d}, {"n_total", d.hdgm.n_total}};
    case DatasetKind::Csv:
      return {{"type", "csv"},
              {"p", d.csv_p.string()},
              {"q", d.csv_q.string()},
              {"delimiter", std::string(1, d.delimiter)},
              {"header", d.header},
              {"train_fraction", d.train_fraction},
              {"eval_size", d.eval_size}};
  }
  return {};
}

Json test_settings_to_json(const TestSettings& t) {
  return {{"n_perm", t.n_perm},
          {"alpha", t.alpha},
          {"n_eval_sets", t.n_eval_sets},
          {"n_repeats", t.n_repeats},
          {"smoothed_pvalue", t.smoothed_pvalue}};
}

DatasetSpec ExperimentConfig::dataset_at(int value) const {
  DatasetSpec d = dataset;
  if (!sweep) return d;
  if (sweep->axis == "n_per_mode") d.blob.n_per_mode = value;
  if (sweep->axis == "n_total") d.hdgm.n_total = value;
  if (sweep->axis == "d") d.hdgm.d = value;
  return d;
}

std::vector<int> ExperimentConfig::sweep_values() const { return sweep ? sweep->values : std::vector<int>{0}; }

MethodSpec ExperimentConfig::resolve_method(const std::string& name, const DatasetSpec& d) const {
  std::vector<std::string> errors;
  MethodSpec m;
  try {
    const MethodKind kind = parse_method_kind(name);
    m = kind == MethodKind::Custom ? ablation_method(name, d) : default_method(kind, d);
  } catch (const std::invalid_argument& e) {
    throw ConfigError({std::string("method: ") + e.what()});
  }
  apply_train_json(train, m.train, errors, "train");
  if (auto it = method_train.find(name); it != method_train.end()) {
    apply_train_json(it->second, m.train, errors, "method_train." + name);
  }
  if (m.kind == MethodKind::MmdD && m.train.variant != KernelFamily::Deep) m.kind = MethodKind::Custom;
  m.mkl_multipliers = mkl_multipliers;
  m.me_candidates = me_candidates;
  if (m.kind != MethodKind::Mkl && m.kind != MethodKind::MeFixed) {
    for (const auto& e : m.train.validation_errors()) errors.push_back("method " + name + ": " + e);
  }
  if (!errors.empty()) throw ConfigError(errors);
  return m;
}

Json ExperimentConfig::to_json() const {
  Json j = {{"seed", seed},
            {"dataset", dataset_to_json(dataset)},
            {"methods", methods},
            {"train", train},
            {"test", test_settings_to_json(test)},
            {"mkl", {{"multipliers", mkl_multipliers}}},
            {"me", {{"candidates", me_candidates}}},
            {"threads", threads}};
  if (!method_train.empty()) {
    Json per = Json::object();
    for (const auto& [k, v] : method_train) per[k] = v;
    j["method_train"] = per;
  }
  if (sweep) j["sweep"] = {{"axis", sweep->axis}, {"values", sweep->values}};
  return j;
}

ExperimentConfig parse_experiment_config(const Json& j) {
  std::vector<std::string> errors;
  ExperimentConfig c;
  if (!j.is_object()) throw ConfigError({"configuration must be a JSON object"});
  Reader r{j, errors, ""};
  r.check_keys({"seed", "dataset", "method", "methods", "train", "method_train", "test", "sweep", "mkl", "me", "threads"});
  r.get("seed", c.seed);
  r.get("threads", c.threads);
  if (c.threads < 1) errors.push_back("'threads' must be >= 1");

  if (j.contains("dataset")) {
    c.dataset = parse_dataset(j.at("dataset"), errors);
  } else {
    errors.push_back("'dataset' block is required");
  }

  if (j.contains("method") && j.contains("methods")) errors.push_back("give either 'method' or 'methods', not both");
  if (j.contains("method")) {
    std::string m;
    if (r.get("method", m)) c.methods = {m};
  } else if (j.contains("methods")) {
    if (j.at("methods").is_array() && !j.at("methods").empty()) {
      c.methods.clear();
      for (const auto& m : j.at("methods")) {
        if (m.is_string()) c.methods.push_back(m.get<std::string>());
        else errors.push_back("'methods' must hold strings");
      }
    } else {
      errors.push_back("'methods' must be a nonempty array");
    }
  }

  if (j.contains("train")) {
    c.train = j.at("train");
    TrainConfig probe;
    apply_train_json(c.train, probe, errors, "train");
  }
  if (j.contains("method_train")) {
    if (j.at("method_train").is_object()) {
      for (auto it = j.at("method_train").begin(); it != j.at("method_train").end(); ++it) {
        TrainConfig probe;
        apply_train_json(it.value(), probe, errors, "method_train." + it.key());
        c.method_train[it.key()] = it.value();
      }
    } else {
      errors.push_back("'method_train' must be an object");
    }
  }
  if (j.contains("test")) c.test = parse_test(j.at("test"), errors);
  c.test.threads = c.threads;

  if (j.contains("mkl")) {
    const Json& m = j.at("mkl");
    Reader mr{m, errors, "mkl"};
    if (m.is_object()) {
      mr.check_keys({"multipliers"});
      if (m.contains("multipliers")) {
        c.mkl_multipliers.clear();
        for (const auto& v : m.at("multipliers")) {
          if (v.is_number() && v.get<double>() > 0.0) c.mkl_multipliers.push_back(v.get<double>());
          else errors.push_back("'mkl.multipliers' must hold positive numbers");
        }
        if (c.mkl_multipliers.empty()) errors.push_back("'mkl.multipliers' must be nonempty");
      }
    } else {
      errors.push_back("'mkl' must be an object");
    }
  }
  if (j.contains("me")) {
    Reader mr{j.at("me"), errors, "me"};
    if (j.at("me").is_object()) {
      mr.check_keys({"candidates"});
      mr.get("candidates", c.me_candidates);
      if (c.me_candidates < 2) errors.push_back("'me.candidates' must be >= 2");
    } else {
      errors.push_back("'me' must be an object");
    }
  }

  if (j.contains("sweep")) {
    const Json& s = j.at("sweep");
    Sweep sweep;
    Reader sr{s, errors, "sweep"};
    if (s.is_object()) {
      sr.check_keys({"axis", "values"});
      sr.get("axis", sweep.axis);
      if (s.contains("values") && s.at("values").is_array()) {
        for (const auto& v : s.at("values")) {
          if (v.is_number_integer() && v.get<int>() > 0) sweep.values.push_back(v.get<int>());
          else errors.push_back("'sweep.values' must hold positive integers");
        }
      }
      if (sweep.values.empty()) errors.push_back("'sweep.values' must be a nonempty array");
      const bool blob_axis = sweep.axis == "n_per_mode";
      const bool hdgm_axis = sweep.axis == "n_total" || sweep.axis == "d";
      if (!blob_axis && !hdgm_axis) {
        errors.push_back("'sweep.axis' must be n_per_mode, n_total or d");
      } else if ((blob_axis && c.dataset.kind != DatasetKind::Blob) ||
                 (hdgm_axis && c.dataset.kind != DatasetKind::Hdgm)) {
        errors.push_back("'sweep.axis' " + sweep.axis + " does not apply to dataset " + to_string(c.dataset.kind));
      }
      if (sweep.axis == "d") {
        for (int v : sweep.values)
          if (v < 2) errors.push_back("'sweep.values' for axis d must be >= 2");
      }
      c.sweep = sweep;
    } else {
      errors.push_back("'sweep' must be an object");
    }
  }

  // Method-specific checks at every sweep point, so nothing fails after work has started.
  if (errors.empty()) {
    for (int v : c.sweep_values()) {
      const DatasetSpec d = c.dataset_at(v);
      for (const auto& name : c.methods) {
        try {
          (void)c.resolve_method(name, d);
        } catch (const ConfigError& e) {
          for (const auto& msg : e.errors())
            if (std::find(errors.begin(), errors.end(), msg) == errors.end()) errors.push_back(msg);
        }
      }
    }
  }
  if (!errors.empty()) throw ConfigError(errors);
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  Json j;
  try {
    j = read_json_file(path);
  } catch (const std::exception& e) {
    throw ConfigError({e.what()});
  }
  return parse_experiment_config(j);
}

}  // namespace learnmmd

#include "learnmmd/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "learnmmd/config.hpp"
#include "learnmmd/estimators.hpp"
#include "learnmmd/serialize.hpp"

namespace learnmmd {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Command line values that override configuration fields.
struct Flags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;

  std::optional<std::string> dataset;
  std::optional<std::string> variant;
  std::optional<int> n_per_mode;
  std::optional<int> d;
  std::optional<int> n_total;
  std::optional<std::string> assignment;
  std::optional<std::string> csv_p, csv_q, delimiter;
  bool header = false;
  std::optional<double> train_fraction;

  std::vector<std::string> methods;
  std::optional<std::string> objective, kernel_variant, epsilon_param;
  std::optional<int> epochs, batch_size, hidden_dim, output_dim, depth;
  std::optional<double> learning_rate, lambda, max_seconds;

  std::optional<int> n_perm, n_eval_sets, n_repeats;
  std::optional<double> alpha;
  bool smoothed_pvalue = false;

  std::optional<std::string> kernel_file;  // test: reuse a saved kernel
  std::optional<int> n_locations;          // me-test
  std::vector<double> multipliers;         // mkl-solve
  std::optional<double> total;             // mkl-solve
};

void add_dataset_flags(CLI::App* app, Flags& f) {
  app->add_option("--dataset", f.dataset, "Dataset type: blob, hdgm or csv");
  app->add_option("--variant", f.variant, "Dataset variant S (same) or D (different)");
  app->add_option("--n-per-mode", f.n_per_mode, "Blob: points per mode");
  app->add_option("--d", f.d, "HDGM: dimension");
  app->add_option("--n-total", f.n_total, "HDGM: points per sample");
  app->add_option("--assignment", f.assignment, "Blob mode assignment: multinomial or exact");
  app->add_option("--csv-p", f.csv_p, "CSV file with the first sample");
  app->add_option("--csv-q", f.csv_q, "CSV file with the second sample");
  app->add_option("--delimiter", f.delimiter, "CSV delimiter");
  app->add_flag("--header", f.header, "Skip one header line in CSV input");
  app->add_option("--train-fraction", f.train_fraction, "CSV: fraction of points used for training");
}

void add_common_flags(CLI::App* app, Flags& f, bool many_methods) {
  app->add_option("--config", f.config, "JSON configuration file");
  app->add_option("--seed", f.seed, "Master seed");
  app->add_option("--threads", f.threads, "Worker threads");
  app->add_option("--out", f.out, "Output directory");
  add_dataset_flags(app, f);
  if (many_methods) {
    app->add_option("--method", f.methods, "Method (repeatable): mmd-d, mmd-o, c2st-s, c2st-l, mkl, me-fixed, V+O");
  } else {
    app->add_option("--method", f.methods, "Method: mmd-d, mmd-o, c2st-s, c2st-l, mkl, me-fixed, V+O")->expected(1);
  }
  app->add_option("--objective", f.objective, "Training objective J, M or C");
  app->add_option("--kernel-variant", f.kernel_variant, "Kernel variant O, G, D, S, L or T");
  app->add_option("--epochs", f.epochs, "Training epochs");
  app->add_option("--batch-size", f.batch_size, "Minibatch size, half from each sample (0 = full batch)");
  app->add_option("--learning-rate", f.learning_rate, "Adam learning rate");
  app->add_option("--lambda", f.lambda, "Variance regularizer");
  app->add_option("--hidden-dim", f.hidden_dim, "Hidden layer width");
  app->add_option("--output-dim", f.output_dim, "Feature dimension");
  app->add_option("--depth", f.depth, "Number of affine layers");
  app->add_option("--epsilon-param", f.epsilon_param, "logistic or exp");
  app->add_option("--max-seconds", f.max_seconds, "Wall-clock limit for training");
  app->add_option("--n-perm", f.n_perm, "Permutations per test");
  app->add_option("--alpha", f.alpha, "Significance level");
  app->add_option("--n-eval-sets", f.n_eval_sets, "Evaluation sets per repeat");
  app->add_option("--n-repeats", f.n_repeats, "Training repeats");
  app->add_flag("--smoothed-pvalue", f.smoothed_pvalue, "Use (1 + #{perm >= est}) / (1 + n_perm)");
}

template <typename T>
void put(Json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

Json build_config_json(const Flags& f) {
  Json j = Json::object();
  if (f.config) j = read_json_file(*f.config);
  if (!j.is_object()) throw ConfigError({"configuration must be a JSON object"});
  if (!j.contains("dataset")) j["dataset"] = {{"type", "blob"}};

  if (f.dataset && j["dataset"].value("type", "") != *f.dataset) j["dataset"] = {{"type", *f.dataset}};
  Json& d = j["dataset"];
  put(d, "variant", f.variant);
  put(d, "n_per_mode", f.n_per_mode);
  put(d, "d", f.d);
  put(d, "n_total", f.n_total);
  put(d, "assignment", f.assignment);
  put(d, "p", f.csv_p);
  put(d, "q", f.csv_q);
  put(d, "delimiter", f.delimiter);
  put(d, "train_fraction", f.train_fraction);
  if (f.header) d["header"] = true;

  put(j, "seed", f.seed);
  put(j, "threads", f.threads);
  if (!f.methods.empty()) {
    j.erase("method");
    j["methods"] = f.methods;
  }
  Json train = Json::object();
  put(train, "objective", f.objective);
  put(train, "kernel_variant", f.kernel_variant);
  put(train, "epsilon_param", f.epsilon_param);
  put(train, "epochs", f.epochs);
  put(train, "batch_size", f.batch_size);
  put(train, "hidden_dim", f.hidden_dim);
  put(train, "output_dim", f.output_dim);
  put(train, "depth", f.depth);
  put(train, "learning_rate", f.learning_rate);
  put(train, "lambda", f.lambda);
  put(train, "max_seconds", f.max_seconds);
  if (!train.empty()) merge_json(j["train"], train);
  Json test = Json::object();
  put(test, "n_perm", f.n_perm);
  put(test, "alpha", f.alpha);
  put(test, "n_eval_sets", f.n_eval_sets);
  put(test, "n_repeats", f.n_repeats);
  if (f.smoothed_pvalue) test["smoothed_pvalue"] = true;
  if (!test.empty()) merge_json(j["test"], test);
  if (!f.multipliers.empty()) j["mkl"] = {{"multipliers", f.multipliers}};
  return j;
}

ExperimentConfig resolve_config(const Flags& f) {
  try {
    return parse_experiment_config(build_config_json(f));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError({e.what()});
  }
}

fs::path require_out(const Flags& f) {
  if (!f.out) throw UsageError("--out DIR is required");
  const fs::path dir = *f.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
  return dir;
}

std::optional<fs::path> optional_out(const Flags& f) {
  if (!f.out) return std::nullopt;
  return require_out(f);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string param_label(const DatasetSpec& d) {
  switch (d.kind) {
    case DatasetKind::Blob: return std::to_string(d.blob.n_per_mode);
    case DatasetKind::Hdgm: return std::to_string(d.hdgm.n_total);
    case DatasetKind::Csv: return "-";
  }
  return "-";
}

Json seeds_json(std::uint64_t seed) {
  return {{"master", seed},
          {"train_data", derive_seed(seed, 0, 0)},
          {"eval_data", derive_seed(seed, 0, 1)},
          {"fit", derive_seed(seed, 0, 1u << 20)},
          {"permutations", derive_seed(seed, 0, 1u << 21)}};
}

Json fitted_json(const FittedMethod& fitted) {
  Json j = {{"method", fitted.method}, {"kernel", kernel_to_json(fitted.kernel)}};
  if (fitted.train_report) j["train_report"] = train_report_to_json(*fitted.train_report);
  if (const auto* g = std::get_if<GaussianKernel>(&fitted.kernel.kernel)) j["bandwidth"] = g->sigma();
  if (fitted.mkl_solution) j["mkl_solution"] = mkl_solution_to_json(*fitted.mkl_solution);
  if (fitted.me_location.size() > 0) j["me_location"] = matrix_to_json(fitted.me_location);
  return j;
}

// ---- generate --------------------------------------------------------------

int cmd_generate(const std::string& type, const Flags& f, std::ostream& out) {
  const fs::path dir = require_out(f);
  Json cfg = {{"type", type}};
  put(cfg, "variant", f.variant);
  put(cfg, "n_per_mode", f.n_per_mode);
  put(cfg, "d", f.d);
  put(cfg, "n_total", f.n_total);
  put(cfg, "assignment", f.assignment);
  if (type == "csv") throw UsageError("generate supports blob and hdgm");
  ExperimentConfig c = parse_experiment_config({{"dataset", cfg}, {"method", "mmd-o"}, {"seed", f.seed.value_or(0)}});
  const std::uint64_t seed = c.seed;
  std::pair<SampleSet, SampleSet> data;
  if (c.dataset.kind == DatasetKind::Blob) {
    BlobSpec spec = c.dataset.blob;
    spec.seed = seed;
    data = generate_blob(spec);
  } else {
    HdgmSpec spec = c.dataset.hdgm;
    spec.seed = seed;
    data = generate_hdgm(spec);
  }
  write_csv(dir / "p.csv", data.first);
  write_csv(dir / "q.csv", data.second);
  write_json_file(dir / "meta.json", {{"dataset", dataset_to_json(c.dataset)},
                                      {"seed", seed},
                                      {"streams", {{"p", derive_seed(seed, 0)}, {"q", derive_seed(seed, 1)}}},
                                      {"rows", data.first.size()},
                                      {"cols", data.first.dim()},
                                      {"files", {"p.csv", "q.csv"}}});
  out << "wrote " << data.first.size() << " x " << data.first.dim() << " samples to " << (dir / "p.csv").string()
      << " and " << (dir / "q.csv").string() << '\n';
  return kExitOk;
}

// ---- train / test ----------------------------------------------------------

int cmd_train(const Flags& f, std::ostream& out) {
  const ExperimentConfig c = resolve_config(f);
  const fs::path dir = require_out(f);
  const DatasetSpec d = c.dataset_at(c.sweep_values().front());
  const MethodSpec m = c.resolve_method(c.methods.front(), d);
  const auto [train_p, train_q] = training_data(d, 0, c.seed);
  const FittedMethod fitted = fit_method(m, train_p, train_q, derive_seed(c.seed, 0, 1u << 20));

  Json kernel_doc = {{"kernel", kernel_to_json(fitted.kernel)},
                     {"method", m.name},
                     {"train_config", train_config_to_json(m.train)},
                     {"config", c.to_json()},
                     {"seeds", seeds_json(c.seed)}};
  if (fitted.me_location.size() > 0) kernel_doc["me_location"] = matrix_to_json(fitted.me_location);
  write_json_file(dir / "kernel.json", kernel_doc);
  Json report = fitted_json(fitted);
  report["config"] = c.to_json();
  report["seeds"] = seeds_json(c.seed);
  write_json_file(dir / "train_report.json", report);

  out << "method " << m.name << " trained on " << train_p.size() << " + " << train_q.size() << " points";
  if (fitted.train_report) {
    out << ": objective " << fmt(fitted.train_report->initial_objective) << " -> "
        << fmt(fitted.train_report->final_objective) << " in " << fitted.train_report->epochs_run << " epochs ("
        << fmt(fitted.train_report->seconds) << " s)";
  }
  out << '\n';
  if (const auto* g = std::get_if<GaussianKernel>(&fitted.kernel.kernel)) out << "bandwidth " << fmt(g->sigma()) << '\n';
  out << "kernel written to " << (dir / "kernel.json").string() << '\n';
  return kExitOk;
}

int cmd_test(const Flags& f, std::ostream& out) {
  const ExperimentConfig c = resolve_config(f);
  const auto dir = optional_out(f);
  const DatasetSpec d = c.dataset_at(c.sweep_values().front());
  const MethodSpec m = c.resolve_method(c.methods.front(), d);

  FittedMethod fitted;
  if (f.kernel_file) {
    const Json doc = read_json_file(*f.kernel_file);
    fitted.method = doc.value("method", m.name);
    fitted.kind = m.kind;
    fitted.kernel = kernel_from_json(doc.contains("kernel") ? doc.at("kernel") : doc);
    if (doc.contains("me_location")) {
      fitted.kind = MethodKind::MeFixed;
      fitted.me_location = matrix_from_json(doc.at("me_location"));
    }
  } else {
    const auto [train_p, train_q] = training_data(d, 0, c.seed);
    fitted = fit_method(m, train_p, train_q, derive_seed(c.seed, 0, 1u << 20));
  }
  const auto [test_p, test_q] = evaluation_data(d, 0, 0, c.seed);
  const auto perm_seed = derive_seed(c.seed, 0, 1u << 21);

  Json outcome;
  TestDecision decision;
  if (fitted.kind == MethodKind::MeFixed) {
    decision = evaluate_method(fitted, test_p, test_q, c.test, perm_seed);
    outcome = {{"statistic", decision.statistic}, {"p_value", decision.p_value}, {"reject", decision.reject},
               {"alpha", c.test.alpha}, {"null", "chi2"}};
  } else {
    PermutationOptions options{c.test.n_perm, c.test.alpha, perm_seed, c.test.smoothed_pvalue, c.threads};
    const TestOutcome o = permutation_test(fitted.kernel, test_p, test_q, options);
    decision = {o.statistic, o.p_value, o.reject};
    outcome = outcome_to_json(o);
  }

  out << "method " << fitted.method << " on " << d.name() << " (" << test_p.size() << " + " << test_q.size()
      << " test points)\n";
  if (const auto* g = std::get_if<GaussianKernel>(&fitted.kernel.kernel)) out << "bandwidth " << fmt(g->sigma()) << '\n';
  out << "statistic " << fmt(decision.statistic) << "  p-value " << fmt(decision.p_value) << "  "
      << (decision.reject ? "reject" : "accept") << " H0 at alpha " << fmt(c.test.alpha) << '\n';

  if (dir) {
    Json doc = fitted_json(fitted);
    doc["outcome"] = outcome;
    doc["config"] = c.to_json();
    doc["seeds"] = seeds_json(c.seed);
    write_json_file(*dir / "outcome.json", doc);
    Json kernel_doc = {{"kernel", kernel_to_json(fitted.kernel)}, {"method", fitted.method}, {"config", c.to_json()},
                       {"seeds", seeds_json(c.seed)}};
    if (fitted.me_location.size() > 0) kernel_doc["me_location"] = matrix_to_json(fitted.me_location);
    write_json_file(*dir / "kernel.json", kernel_doc);
  }
  return kExitOk;
}

// ---- benchmark -------------------------------------------------------------

int cmd_benchmark(const Flags& f, std::ostream& out) {
  const ExperimentConfig c = resolve_config(f);
  const fs::path dir = require_out(f);
  const fs::path csv = dir / "report.csv";
  const fs::path summary_path = dir / "summary.json";

  ExperimentReport report;
  Json cells = Json::array();
  auto write_summary = [&](bool complete) {
    write_json_file(summary_path, {{"config", c.to_json()}, {"seed", c.seed}, {"complete", complete}, {"cells", cells}});
  };
  report.write_csv(csv);
  write_summary(false);

  struct Line {
    std::string method, param;
    double mean, se;
  };
  std::vector<Line> lines;
  for (int value : c.sweep_values()) {
    const DatasetSpec d = c.dataset_at(value);
    for (const auto& name : c.methods) {
      const MethodSpec m = c.resolve_method(name, d);
      const auto start = std::chrono::steady_clock::now();
      const ProtocolResult r = run_protocol(m, d, c.test, c.seed);
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      const std::string param = param_label(d) + (c.sweep && c.sweep->axis == "d" ? "@d=" + std::to_string(value) : "");
      report.add(m.name, d.name(), param, r);
      report.write_csv(csv);
      Json cell = {{"method", m.name},          {"dataset", dataset_to_json(d)},
                   {"param", param},            {"repeat_rates", r.repeat_rates},
                   {"mean", r.mean_rate},       {"stderr", r.stderr_rate},
                   {"seconds", seconds},        {"train_config", train_config_to_json(m.train)}};
      cells.push_back(cell);
      write_summary(false);
      lines.push_back({m.name, param, r.mean_rate, r.stderr_rate});
      out << m.name << " " << d.name() << " " << param << ": " << fmt(r.mean_rate) << " +- " << fmt(r.stderr_rate)
          << " (" << fmt(seconds) << " s)\n" << std::flush;
    }
  }
  write_summary(true);

  out << '\n' << std::left << std::setw(12) << "method" << std::setw(14) << "param" << std::setw(12) << "rate"
      << "stderr\n";
  for (const auto& l : lines) {
    out << std::left << std::setw(12) << l.method << std::setw(14) << l.param << std::setw(12) << fmt(l.mean) << fmt(l.se)
        << '\n';
  }
  out << "report written to " << csv.string() << '\n';
  return kExitOk;
}

// ---- mkl-solve / me-test ---------------------------------------------------

int cmd_mkl_solve(const Flags& f, std::ostream& out) {
  Flags g = f;
  g.methods = {"mkl"};
  const ExperimentConfig c = resolve_config(g);
  const auto dir = optional_out(f);
  const DatasetSpec d = c.dataset_at(c.sweep_values().front());
  const auto [train_p, train_q] = training_data(d, 0, c.seed);
  const double med = median_pairwise_distance(SampleSet::concat(train_p, train_q).points());
  std::vector<KernelSpec> bases;
  for (double m : c.mkl_multipliers) bases.push_back(GaussianKernel{std::log(m * med)});
  double lambda = kDefaultLambda;
  if (c.train.contains("lambda")) lambda = c.train.at("lambda").get<double>();
  const MklProblem problem = build_mkl_problem(bases, train_p, train_q, lambda, f.total.value_or(1.0));
  const MklSolution sol = solve_mkl(problem);
  const PowerCriterion pc = mkl_criterion(problem, sol.weights, lambda);

  out << "b =";
  for (Index l = 0; l < problem.b.size(); ++l) out << ' ' << fmt(problem.b(l));
  out << "\nweights =";
  for (Index l = 0; l < sol.weights.size(); ++l) out << ' ' << fmt(sol.weights(l));
  out << "\nJ = " << fmt(pc.j_hat) << "  kkt residual " << fmt(sol.kkt_residual) << "  iterations " << sol.iterations
      << '\n';
  if (dir) {
    Json bandwidths = Json::array();
    for (double m : c.mkl_multipliers) bandwidths.push_back(m * med);
    write_json_file(*dir / "mkl_problem.json",
                    {{"problem", mkl_problem_to_json(problem)}, {"bandwidths", bandwidths}, {"config", c.to_json()},
                     {"seeds", seeds_json(c.seed)}});
    write_json_file(*dir / "mkl_solution.json",
                    {{"solution", mkl_solution_to_json(sol)},
                     {"j_hat", pc.j_hat},
                     {"mmd2_hat", pc.mmd2_hat},
                     {"sigma2_hat", pc.sigma2_hat},
                     {"config", c.to_json()},
                     {"seeds", seeds_json(c.seed)}});
  }
  return kExitOk;
}

int cmd_me_test(const Flags& f, std::ostream& out) {
  Flags g = f;
  g.methods = {"me-fixed"};
  const ExperimentConfig c = resolve_config(g);
  const auto dir = optional_out(f);
  const int n_locations = f.n_locations.value_or(1);
  if (n_locations < 1) throw UsageError("--n-locations must be >= 1");
  const DatasetSpec d = c.dataset_at(c.sweep_values().front());
  const MethodSpec m = c.resolve_method("me-fixed", d);
  const auto [train_p, train_q] = training_data(d, 0, c.seed);
  FittedMethod fitted = fit_method(m, train_p, train_q, derive_seed(c.seed, 0, 1u << 20));
  if (n_locations > 1) {
    // Several locations drawn at random from the pooled training points.
    const SampleSet pooled = SampleSet::concat(train_p, train_q);
    if (n_locations > pooled.size()) throw UsageError("--n-locations exceeds the number of training points");
    Rng rng(derive_seed(c.seed, 0, 3));
    auto order = random_permutation(static_cast<std::size_t>(pooled.size()), rng);
    order.resize(static_cast<std::size_t>(n_locations));
    fitted.me_location = pooled.subset(order).points();
  }
  const auto [test_p, test_q] = evaluation_data(d, 0, 0, c.seed);
  const MeResult r = me_statistic(fitted.kernel, test_p, test_q, fitted.me_location);
  const bool reject = r.p_value < c.test.alpha;
  out << "ME statistic " << fmt(r.statistic) << " with " << fitted.me_location.rows() << " location(s)  p-value "
      << fmt(r.p_value) << "  " << (reject ? "reject" : "accept") << " H0 at alpha " << fmt(c.test.alpha) << '\n';
  if (dir) {
    Json doc = fitted_json(fitted);
    doc["outcome"] = {{"statistic", r.statistic}, {"p_value", r.p_value}, {"reject", reject}, {"alpha", c.test.alpha}};
    doc["config"] = c.to_json();
    doc["seeds"] = seeds_json(c.seed);
    write_json_file(*dir / "me_outcome.json", doc);
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-sample testing with learned kernels", "learnmmd"};
  app.require_subcommand(1);
  Flags flags;
  std::string generate_type;

  auto* generate = app.add_subcommand("generate", "Write synthetic samples as CSV");
  generate->add_option("type", generate_type, "blob or hdgm")->required()->check(CLI::IsMember({"blob", "hdgm"}));
  generate->add_option("--seed", flags.seed, "Seed");
  generate->add_option("--out", flags.out, "Output directory");
  generate->add_option("--variant", flags.variant, "S or D");
  generate->add_option("--n-per-mode", flags.n_per_mode, "Blob: points per mode");
  generate->add_option("--d", flags.d, "HDGM: dimension");
  generate->add_option("--n-total", flags.n_total, "HDGM: points per sample");
  generate->add_option("--assignment", flags.assignment, "Blob mode assignment: multinomial or exact");

  auto* train = app.add_subcommand("train", "Train a kernel on the training split");
  add_common_flags(train, flags, false);
  auto* test = app.add_subcommand("test", "Train a kernel and run one permutation test");
  add_common_flags(test, flags, false);
  test->add_option("--kernel", flags.kernel_file, "Use a saved kernel instead of training");
  auto* bench = app.add_subcommand("benchmark", "Rejection rates over repeats, sweep points and methods");
  add_common_flags(bench, flags, true);
  auto* mkl = app.add_subcommand("mkl-solve", "Optimal nonnegative combination of Gaussian kernels");
  add_common_flags(mkl, flags, false);
  mkl->add_option("--multipliers", flags.multipliers, "Base bandwidths as multiples of the median distance");
  mkl->add_option("--total", flags.total, "Sum of the returned weights");
  auto* me = app.add_subcommand("me-test", "Mean-embedding test with a Gaussian kernel");
  add_common_flags(me, flags, false);
  me->add_option("--n-locations", flags.n_locations, "1 = best training point, >1 = random training points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(generate_type, flags, out);
    if (train->parsed()) return cmd_train(flags, out);
    if (test->parsed()) return cmd_test(flags, out);
    if (bench->parsed()) return cmd_benchmark(flags, out);
    if (mkl->parsed()) return cmd_mkl_solve(flags, out);
    if (me->parsed()) return cmd_me_test(flags, out);
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace learnmmd

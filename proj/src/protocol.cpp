#include "learnmmd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace learnmmd {

std::string to_string(MethodKind kind) {
  switch (kind) {
    case MethodKind::MmdD: return "mmd-d";
    case MethodKind::MmdO: return "mmd-o";
    case MethodKind::C2stS: return "c2st-s";
    case MethodKind::C2stL: return "c2st-l";
    case MethodKind::Mkl: return "mkl";
    case MethodKind::MeFixed: return "me-fixed";
    case MethodKind::Custom: return "custom";
  }
  return "?";
}

MethodKind parse_method_kind(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (t == "mmd-d") return MethodKind::MmdD;
  if (t == "mmd-o") return MethodKind::MmdO;
  if (t == "c2st-s") return MethodKind::C2stS;
  if (t == "c2st-l") return MethodKind::C2stL;
  if (t == "mkl") return MethodKind::Mkl;
  if (t == "me-fixed" || t == "me") return MethodKind::MeFixed;
  if (text.find('+') != std::string::npos) return MethodKind::Custom;
  throw std::invalid_argument("unknown method '" + text +
                              "' (expected mmd-d, mmd-o, c2st-s, c2st-l, mkl, me-fixed or an ablation code like D+J)");
}

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::Blob: return "blob";
    case DatasetKind::Hdgm: return "hdgm";
    case DatasetKind::Csv: return "csv";
  }
  return "?";
}

DatasetKind parse_dataset_kind(const std::string& text) {
  if (text == "blob") return DatasetKind::Blob;
  if (text == "hdgm") return DatasetKind::Hdgm;
  if (text == "csv") return DatasetKind::Csv;
  throw std::invalid_argument("unknown dataset '" + text + "' (expected blob, hdgm or csv)");
}

Index DatasetSpec::dim() const {
  switch (kind) {
    case DatasetKind::Blob: return 2;
    case DatasetKind::Hdgm: return hdgm.d;
    case DatasetKind::Csv: return 0;
  }
  return 0;
}

std::string DatasetSpec::name() const {
  switch (kind) {
    case DatasetKind::Blob: return blob.variant == DatasetVariant::Same ? "blob-s" : "blob-d";
    case DatasetKind::Hdgm: return hdgm.variant == DatasetVariant::Same ? "hdgm-s" : "hdgm-d";
    case DatasetKind::Csv: return "csv";
  }
  return "?";
}

namespace {

void apply_dataset_defaults(TrainConfig& c, const DatasetSpec& dataset, bool classifier) {
  c.depth = 5;
  c.epochs = 1000;
  c.batch_size = 0;
  switch (dataset.kind) {
    case DatasetKind::Blob:
      c.hidden_dim = c.output_dim = 50;
      c.learning_rate = 5e-4;
      if (classifier) {
        c.batch_size = std::min(2 * dataset.blob.n_per_mode, 128);
        c.epochs = 500;
      }
      break;
    case DatasetKind::Hdgm:
      c.hidden_dim = c.output_dim = 3 * dataset.hdgm.d;
      c.learning_rate = 1e-5;
      if (classifier) c.batch_size = 128;
      break;
    case DatasetKind::Csv:
      c.hidden_dim = c.output_dim = 20;
      c.learning_rate = 5e-4;
      if (classifier) c.batch_size = 128;
      break;
  }
  if (classifier) c.learning_rate = 1e-3;
}

}  // namespace

MethodSpec default_method(MethodKind kind, const DatasetSpec& dataset) {
  MethodSpec m;
  m.kind = kind;
  m.name = to_string(kind);
  TrainConfig& c = m.train;
  switch (kind) {
    case MethodKind::MmdD:
      c.variant = KernelFamily::Deep;
      c.objective = Objective::PowerRatio;
      apply_dataset_defaults(c, dataset, false);
      break;
    case MethodKind::MmdO:
      c.variant = KernelFamily::Gaussian;
      c.objective = Objective::PowerRatio;
      apply_dataset_defaults(c, dataset, false);
      if (dataset.kind == DatasetKind::Hdgm) c.learning_rate = 1e-3;
      break;
    case MethodKind::C2stS:
      c.variant = KernelFamily::Sign;
      c.objective = Objective::CrossEntropy;
      apply_dataset_defaults(c, dataset, true);
      break;
    case MethodKind::C2stL:
      c.variant = KernelFamily::Linear;
      c.objective = Objective::CrossEntropy;
      apply_dataset_defaults(c, dataset, true);
      break;
    case MethodKind::Mkl:
    case MethodKind::MeFixed:
    case MethodKind::Custom:
      apply_dataset_defaults(c, dataset, false);
      break;
  }
  return m;
}

MethodSpec ablation_method(const std::string& code, const DatasetSpec& dataset) {
  const auto plus = code.find('+');
  if (plus == std::string::npos) throw std::invalid_argument("ablation code must look like V+O, got '" + code + "'");
  const KernelFamily variant = parse_kernel_family(code.substr(0, plus));
  const Objective objective = parse_objective(code.substr(plus + 1));
  MethodSpec m;
  m.kind = MethodKind::Custom;
  m.name = code;
  m.train.variant = variant;
  m.train.objective = objective;
  apply_dataset_defaults(m.train, dataset, objective == Objective::CrossEntropy);
  return m;
}

FittedMethod fit_method(const MethodSpec& method, const SampleSet& train_p, const SampleSet& train_q,
                        std::uint64_t seed) {
  FittedMethod out;
  out.method = method.name;
  out.kind = method.kind;
  if (method.kind == MethodKind::Mkl) {
    const SampleSet pooled = SampleSet::concat(train_p, train_q);
    const double med = median_pairwise_distance(pooled.points());
    std::vector<KernelSpec> bases;
    for (double m : method.mkl_multipliers) bases.push_back(GaussianKernel{std::log(m * (med > 0.0 ? med : 1.0))});
    const MklProblem problem = build_mkl_problem(bases, train_p, train_q, method.train.lambda);
    std::vector<double> weights(bases.size(), 1.0 / static_cast<double>(bases.size()));
    try {
      MklSolution sol = solve_mkl(problem);
      weights.assign(sol.weights.data(), sol.weights.data() + sol.weights.size());
      out.mkl_solution = std::move(sol);
    } catch (const MklInfeasibleError&) {
      // No base kernel separates the training samples; keep equal weights.
    }
    out.kernel = MklKernel{weights, bases};
    return out;
  }
  if (method.kind == MethodKind::MeFixed) {
    const SampleSet pooled = SampleSet::concat(train_p, train_q);
    const double med = median_pairwise_distance(pooled.points());
    out.kernel = GaussianKernel{std::log(med > 0.0 ? med : 1.0)};
    const Index per_side = std::max<Index>(1, std::min<Index>(method.me_candidates / 2, train_p.size()));
    Matrix candidates(2 * per_side, train_p.dim());
    candidates << train_p.points().topRows(per_side), train_q.points().topRows(per_side);
    const LocationChoice choice = select_location_from_data(out.kernel, train_p, train_q, candidates);
    out.me_location = choice.location.transpose();
    return out;
  }
  TrainConfig config = method.train;
  config.seed = seed;
  TrainReport report = train_kernel(config, train_p, train_q);
  out.kernel = report.kernel;
  out.train_report = std::move(report);
  return out;
}

TestDecision evaluate_method(const FittedMethod& fitted, const SampleSet& test_p, const SampleSet& test_q,
                             const TestSettings& settings, std::uint64_t seed) {
  TestDecision d;
  if (fitted.kind == MethodKind::MeFixed) {
    const MeResult r = me_statistic(fitted.kernel, test_p, test_q, fitted.me_location);
    d.statistic = r.statistic;
    d.p_value = r.p_value;
    d.reject = r.p_value < settings.alpha;
    return d;
  }
  PermutationOptions options;
  options.n_perm = settings.n_perm;
  options.alpha = settings.alpha;
  options.seed = seed;
  options.smoothed_pvalue = settings.smoothed_pvalue;
  const TestOutcome outcome = permutation_test(fitted.kernel, test_p, test_q, options);
  d.statistic = outcome.statistic;
  d.p_value = outcome.p_value;
  d.reject = outcome.reject;
  return d;
}

namespace {

std::pair<SampleSet, SampleSet> load_pair(const DatasetSpec& dataset) {
  SampleSet p = load_csv(dataset.csv_p, dataset.delimiter, dataset.header);
  SampleSet q = load_csv(dataset.csv_q, dataset.delimiter, dataset.header);
  return {std::move(p), std::move(q)};
}

std::pair<SampleSet, SampleSet> synthetic(const DatasetSpec& dataset, std::uint64_t seed) {
  if (dataset.kind == DatasetKind::Blob) {
    BlobSpec spec = dataset.blob;
    spec.seed = seed;
    return generate_blob(spec);
  }
  HdgmSpec spec = dataset.hdgm;
  spec.seed = seed;
  return generate_hdgm(spec);
}

}  // namespace

std::pair<SampleSet, SampleSet> training_data(const DatasetSpec& dataset, int repeat, std::uint64_t seed) {
  const auto r = static_cast<std::uint64_t>(repeat);
  if (dataset.kind == DatasetKind::Csv) {
    const auto [p, q] = load_pair(dataset);
    SplitPair s = split(p, q, dataset.train_fraction, derive_seed(seed, r, 0));
    return {std::move(s.train_p), std::move(s.train_q)};
  }
  return synthetic(dataset, derive_seed(seed, r, 0));
}

std::pair<SampleSet, SampleSet> evaluation_data(const DatasetSpec& dataset, int repeat, int eval_index,
                                                std::uint64_t seed) {
  const auto r = static_cast<std::uint64_t>(repeat);
  const auto e = static_cast<std::uint64_t>(eval_index);
  if (dataset.kind == DatasetKind::Csv) {
    const auto [p, q] = load_pair(dataset);
    SplitPair s = split(p, q, dataset.train_fraction, derive_seed(seed, r, 0));
    const Index n = s.test_p.size();
    const Index m = dataset.eval_size > 0 ? std::min(dataset.eval_size, n) : n;
    Rng rng(derive_seed(seed, r, 1 + e));
    auto pick_p = random_permutation(static_cast<std::size_t>(n), rng);
    auto pick_q = random_permutation(static_cast<std::size_t>(n), rng);
    pick_p.resize(static_cast<std::size_t>(m));
    pick_q.resize(static_cast<std::size_t>(m));
    return {s.test_p.subset(pick_p), s.test_q.subset(pick_q)};
  }
  return synthetic(dataset, derive_seed(seed, r, 1 + e));
}

ProtocolResult run_protocol(const MethodSpec& method, const DatasetSpec& dataset, const TestSettings& settings,
                            std::uint64_t seed) {
  if (settings.n_repeats < 1 || settings.n_eval_sets < 1) {
    throw std::invalid_argument("run_protocol: n_repeats and n_eval_sets must be positive");
  }
  ProtocolResult result;
  for (int r = 0; r < settings.n_repeats; ++r) {
    const auto rr = static_cast<std::uint64_t>(r);
    const auto [train_p, train_q] = training_data(dataset, r, seed);
    FittedMethod fitted = fit_method(method, train_p, train_q, derive_seed(seed, rr, 1u << 20));

    std::vector<char> rejected(static_cast<std::size_t>(settings.n_eval_sets), 0);
    auto work = [&](int begin, int end) {
      for (int e = begin; e < end; ++e) {
        const auto [test_p, test_q] = evaluation_data(dataset, r, e, seed);
        const auto perm_seed = derive_seed(seed, rr, (1u << 21) + static_cast<std::uint64_t>(e));
        rejected[static_cast<std::size_t>(e)] = evaluate_method(fitted, test_p, test_q, settings, perm_seed).reject;
      }
    };
    const int workers = std::clamp(settings.threads, 1, settings.n_eval_sets);
    if (workers == 1) {
      work(0, settings.n_eval_sets);
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back(work, w * settings.n_eval_sets / workers, (w + 1) * settings.n_eval_sets / workers);
      }
      for (auto& t : pool) t.join();
    }
    const double rate = static_cast<double>(std::count(rejected.begin(), rejected.end(), 1)) / settings.n_eval_sets;
    result.repeat_rates.push_back(rate);
    result.fitted.push_back(std::move(fitted));
  }
  const auto count = static_cast<double>(result.repeat_rates.size());
  double sum = 0.0;
  for (double v : result.repeat_rates) sum += v;
  result.mean_rate = sum / count;
  if (result.repeat_rates.size() > 1) {
    double ss = 0.0;
    for (double v : result.repeat_rates) ss += (v - result.mean_rate) * (v - result.mean_rate);
    result.stderr_rate = std::sqrt(ss / (count - 1.0)) / std::sqrt(count);
  }
  return result;
}

void ExperimentReport::add(const std::string& method, const std::string& dataset, const std::string& param,
                           const ProtocolResult& result) {
  for (std::size_t r = 0; r < result.repeat_rates.size(); ++r) {
    rows_.push_back({method, dataset, param, static_cast<int>(r), result.repeat_rates[r], 0.0});
  }
  rows_.push_back({method, dataset, param, -1, result.mean_rate, result.stderr_rate});
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream out;
  out << kHeader << '\n';
  char buf[64];
  for (const auto& row : rows_) {
    out << row.method << ',' << row.dataset << ',' << row.param << ',';
    if (row.repeat < 0) {
      out << "all";
    } else {
      out << row.repeat;
    }
    std::snprintf(buf, sizeof buf, ",%.17g", row.power_or_type1);
    out << buf;
    std::snprintf(buf, sizeof buf, ",%.17g", row.stderr_value);
    out << buf << '\n';
  }
  return out.str();
}

void ExperimentReport::write_csv(const std::filesystem::path& path) const {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << to_csv();
    if (!f) throw std::runtime_error("cannot write " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace learnmmd

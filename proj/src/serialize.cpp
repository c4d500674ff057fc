#include "learnmmd/serialize.hpp"

#include <fstream>
#include <stdexcept>

namespace learnmmd {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number()) throw std::invalid_argument(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

const char* epsilon_name(EpsilonParam p) { return p == EpsilonParam::Logistic ? "logistic" : "exp"; }

EpsilonParam epsilon_from(const Json& j) {
  if (!j.contains("epsilon_param")) return EpsilonParam::Logistic;
  const auto s = j.at("epsilon_param").get<std::string>();
  if (s == "logistic") return EpsilonParam::Logistic;
  if (s == "exp") return EpsilonParam::Exp;
  throw std::invalid_argument("unknown epsilon_param '" + s + "'");
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json data = Json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index k = 0; k < m.cols(); ++k) data.push_back(m(i, k));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const Json& j) {
  const auto rows = field(j, "rows").get<Index>();
  const auto cols = field(j, "cols").get<Index>();
  const Json& data = field(j, "data");
  if (rows < 0 || cols < 0 || !data.is_array() || static_cast<Index>(data.size()) != rows * cols) {
    throw std::invalid_argument("matrix: data does not match rows x cols");
  }
  Matrix m(rows, cols);
  std::size_t t = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index k = 0; k < cols; ++k) m(i, k) = data.at(t++).get<double>();
  return m;
}

Json vector_to_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("vector: expected an array");
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

Json net_to_json(const NetParams& net) {
  Json layers = Json::array();
  for (const auto& layer : net.layers) {
    layers.push_back({{"weight", matrix_to_json(layer.weight)}, {"bias", vector_to_json(layer.bias)}});
  }
  return {{"activation", "softplus"}, {"layers", std::move(layers)}};
}

NetParams net_from_json(const Json& j) {
  NetParams net;
  for (const auto& layer : field(j, "layers")) {
    DenseLayer l{matrix_from_json(field(layer, "weight")), vector_from_json(field(layer, "bias"))};
    if (l.bias.size() != l.weight.rows()) throw std::invalid_argument("network: bias does not match weight rows");
    if (!net.layers.empty() && net.layers.back().weight.rows() != l.weight.cols()) {
      throw std::invalid_argument("network: consecutive layer shapes do not compose");
    }
    net.layers.push_back(std::move(l));
  }
  return net;
}

Json head_to_json(const ClassifierHead& head) { return {{"w", vector_to_json(head.w)}, {"b", head.b}}; }

ClassifierHead head_from_json(const Json& j) { return {vector_from_json(field(j, "w")), number(j, "b")}; }

Json kernel_to_json(const KernelSpec& spec) {
  Json j = std::visit(
      Overloaded{
          [](const GaussianKernel& k) -> Json { return {{"log_sigma", k.log_sigma}}; },
          [](const FeatureGaussianKernel& k) -> Json {
            return {{"net", net_to_json(k.net)}, {"log_sigma_phi", k.log_sigma_phi}};
          },
          [](const DeepGaussianKernel& k) -> Json {
            return {{"net", net_to_json(k.net)},
                    {"log_sigma_phi", k.log_sigma_phi},
                    {"log_sigma_q", k.log_sigma_q},
                    {"logit_epsilon", k.logit_epsilon},
                    {"epsilon_param", epsilon_name(k.epsilon_param)}};
          },
          [](const SignScoreKernel& k) -> Json { return {{"net", net_to_json(k.net)}, {"head", head_to_json(k.head)}}; },
          [](const LinearScoreKernel& k) -> Json {
            return {{"net", net_to_json(k.net)}, {"head", head_to_json(k.head)}};
          },
          [](const TanhScoreKernel& k) -> Json {
            return {{"net", net_to_json(k.net)}, {"head", head_to_json(k.head)}, {"frobenius_norm", k.frobenius_norm}};
          },
          [](const MklKernel& k) -> Json {
            Json bases = Json::array();
            for (const auto& b : k.bases) bases.push_back(kernel_to_json(b));
            return {{"weights", k.weights}, {"bases", std::move(bases)}};
          },
      },
      spec.kernel);
  j["type"] = spec.name();
  return j;
}

KernelSpec kernel_from_json(const Json& j) {
  const auto type = field(j, "type").get<std::string>();
  KernelSpec spec;
  if (type == "gaussian") {
    spec = GaussianKernel{number(j, "log_sigma")};
  } else if (type == "feature_gaussian") {
    spec = FeatureGaussianKernel{net_from_json(field(j, "net")), number(j, "log_sigma_phi")};
  } else if (type == "deep_gaussian") {
    spec = DeepGaussianKernel{net_from_json(field(j, "net")), number(j, "log_sigma_phi"), number(j, "log_sigma_q"),
                              number(j, "logit_epsilon"), epsilon_from(j)};
  } else if (type == "sign_score") {
    spec = SignScoreKernel{net_from_json(field(j, "net")), head_from_json(field(j, "head"))};
  } else if (type == "linear_score") {
    spec = LinearScoreKernel{net_from_json(field(j, "net")), head_from_json(field(j, "head"))};
  } else if (type == "tanh_score") {
    spec = TanhScoreKernel{net_from_json(field(j, "net")), head_from_json(field(j, "head")),
                           number(j, "frobenius_norm")};
  } else if (type == "mkl") {
    MklKernel k;
    k.weights = field(j, "weights").get<std::vector<double>>();
    for (const auto& b : field(j, "bases")) k.bases.push_back(kernel_from_json(b));
    spec = std::move(k);
  } else {
    throw std::invalid_argument("unknown kernel type '" + type + "'");
  }
  spec.validate();
  return spec;
}

Json outcome_to_json(const TestOutcome& o) {
  return {{"statistic", o.statistic}, {"p_value", o.p_value},     {"reject", o.reject},
          {"alpha", o.alpha},         {"threshold", o.threshold}, {"null_samples", o.null_samples}};
}

Json train_report_to_json(const TrainReport& r) {
  Json j = {{"trace", r.trace},
            {"initial_objective", r.initial_objective},
            {"final_objective", r.final_objective},
            {"epochs_run", r.epochs_run},
            {"stopped_by_time", r.stopped_by_time},
            {"seconds", r.seconds},
            {"kernel", kernel_to_json(r.kernel)}};
  if (!r.posthoc_trace.empty()) j["posthoc_trace"] = r.posthoc_trace;
  if (r.params.family == KernelFamily::Gaussian) j["bandwidth"] = std::exp(r.params.log_sigma_q);
  return j;
}

Json mkl_problem_to_json(const MklProblem& p) {
  return {{"A", matrix_to_json(p.a)}, {"b", vector_to_json(p.b)}, {"lambda", p.lambda}, {"total", p.total}};
}

Json mkl_solution_to_json(const MklSolution& s) {
  return {{"weights", vector_to_json(s.weights)}, {"direction", vector_to_json(s.direction)},
          {"objective", s.objective},             {"kkt_residual", s.kkt_residual},
          {"iterations", s.iterations},           {"converged", s.converged}};
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace learnmmd

#include "learnmmd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace learnmmd {

double GaussianKernel::sigma() const { return std::exp(log_sigma); }

double DeepGaussianKernel::epsilon() const {
  return epsilon_param == EpsilonParam::Logistic ? logistic(logit_epsilon) : std::exp(logit_epsilon);
}

bool operator==(const MklKernel& a, const MklKernel& b) { return a.weights == b.weights && a.bases == b.bases; }

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_head(const NetParams& net, const ClassifierHead& head) {
  if (head.w.size() != net.output_dim()) throw std::invalid_argument("classifier head does not match network output");
}

}  // namespace

std::string KernelSpec::name() const {
  return std::visit(Overloaded{
                        [](const GaussianKernel&) { return std::string("gaussian"); },
                        [](const FeatureGaussianKernel&) { return std::string("feature_gaussian"); },
                        [](const DeepGaussianKernel&) { return std::string("deep_gaussian"); },
                        [](const SignScoreKernel&) { return std::string("sign_score"); },
                        [](const LinearScoreKernel&) { return std::string("linear_score"); },
                        [](const TanhScoreKernel&) { return std::string("tanh_score"); },
                        [](const MklKernel&) { return std::string("mkl"); },
                    },
                    kernel);
}

Index KernelSpec::input_dim() const {
  return std::visit(Overloaded{
                        [](const GaussianKernel&) -> Index { return 0; },
                        [](const MklKernel& k) -> Index {
                          for (const auto& base : k.bases) {
                            if (const Index d = base.input_dim(); d > 0) return d;
                          }
                          return 0;
                        },
                        [](const auto& k) -> Index { return k.net.input_dim(); },
                    },
                    kernel);
}

void KernelSpec::validate() const {
  std::visit(Overloaded{
                 [](const GaussianKernel& k) {
                   if (!std::isfinite(k.log_sigma)) throw std::invalid_argument("gaussian bandwidth is not finite");
                 },
                 [](const FeatureGaussianKernel& k) {
                   if (k.net.empty()) throw std::invalid_argument("feature kernel needs a network");
                 },
                 [](const DeepGaussianKernel& k) {
                   if (k.net.empty()) throw std::invalid_argument("deep kernel needs a network");
                   const double eps = k.epsilon();
                   if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("deep kernel epsilon outside (0, 1)");
                 },
                 [](const SignScoreKernel& k) { check_head(k.net, k.head); },
                 [](const LinearScoreKernel& k) { check_head(k.net, k.head); },
                 [](const TanhScoreKernel& k) {
                   check_head(k.net, k.head);
                   if (!(k.frobenius_norm > 0.0)) throw std::invalid_argument("tanh kernel norm must be positive");
                 },
                 [](const MklKernel& k) {
                   if (k.weights.size() != k.bases.size()) throw std::invalid_argument("mkl weights/bases size mismatch");
                   if (k.bases.empty()) throw std::invalid_argument("mkl kernel needs at least one base");
                   for (double w : k.weights) {
                     if (!(w >= 0.0)) throw std::invalid_argument("mkl weights must be nonnegative");
                   }
                   for (const auto& base : k.bases) base.validate();
                 },
             },
             kernel);
}

Matrix pairwise_sq_dists(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("pairwise distances: dimension mismatch");
  const Matrix at = a.transpose();
  const Matrix bt = b.transpose();
  Matrix out(a.rows(), b.rows());
  for (Index j = 0; j < b.rows(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) out(i, j) = (at.col(i) - bt.col(j)).squaredNorm();
  }
  return out;
}

Matrix pairwise_sq_dists(const Matrix& a) {
  const Matrix at = a.transpose();
  const Index n = a.rows();
  Matrix out(n, n);
  // Both triangles, column by column: (a - b)^2 == (b - a)^2 bit for bit, and
  // contiguous writes beat mirroring once n^2 outgrows the cache.
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) out(i, j) = (at.col(i) - at.col(j)).squaredNorm();
    out(j, j) = 0.0;
  }
  return out;
}

double median_pairwise_distance(const Matrix& points) {
  const Index n = points.rows();
  if (n < 2) throw std::invalid_argument("median distance needs at least two points");
  const Matrix d2 = pairwise_sq_dists(points);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index j = 1; j < n; ++j)
    for (Index i = 0; i < j; ++i) values.push_back(std::sqrt(d2(i, j)));
  const std::size_t m = values.size();
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(m / 2), values.end());
  double med = values[m / 2];
  if (m % 2 == 0) {
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(m / 2));
    med = 0.5 * (med + lower);
  }
  return med;
}

namespace {

// Per-point quantities a kernel needs.
struct Embedding {
  const Matrix* inputs = nullptr;
  Matrix features;
  Vector scores;
};

Embedding embed(const KernelSpec& spec, const Matrix& points) {
  const Index expected = spec.input_dim();
  if (expected > 0 && points.cols() != expected) {
    throw std::invalid_argument("kernel input dimension mismatch: expected " + std::to_string(expected) + ", got " +
                                std::to_string(points.cols()));
  }
  Embedding e;
  e.inputs = &points;
  std::visit(Overloaded{
                 [](const GaussianKernel&) {},
                 [](const MklKernel&) {},
                 [&](const FeatureGaussianKernel& k) { e.features = forward_batch(k.net, points); },
                 [&](const DeepGaussianKernel& k) { e.features = forward_batch(k.net, points); },
                 [&](const SignScoreKernel& k) { e.scores = score(k.net, k.head, points); },
                 [&](const LinearScoreKernel& k) { e.scores = score(k.net, k.head, points); },
                 [&](const TanhScoreKernel& k) {
                   e.scores = score(k.net, k.head, points).unaryExpr(
                       [s = k.frobenius_norm](double f) { return std::tanh(f / s); });
                 },
             },
             spec.kernel);
  return e;
}

double gaussian_of(double sq_dist, double sigma) { return std::exp(-std::max(sq_dist, 0.0) / (2.0 * sigma * sigma)); }

Matrix gram_from_embeddings(const KernelSpec& spec, const Embedding& a, const Embedding& b, bool symmetric);

Matrix sq_dists(const Matrix& a, const Matrix& b, bool symmetric) {
  return symmetric ? pairwise_sq_dists(a) : pairwise_sq_dists(a, b);
}

Matrix gram_from_embeddings(const KernelSpec& spec, const Embedding& a, const Embedding& b, bool symmetric) {
  return std::visit(
      Overloaded{
          [&](const GaussianKernel& k) -> Matrix {
            const double sigma = k.sigma();
            Matrix d = sq_dists(*a.inputs, *b.inputs, symmetric);
            d = d.unaryExpr([sigma](double v) { return gaussian_of(v, sigma); });  // in place
            return d;
          },
          [&](const FeatureGaussianKernel& k) -> Matrix {
            const double sigma = std::exp(k.log_sigma_phi);
            Matrix d = sq_dists(a.features, b.features, symmetric);
            d = d.unaryExpr([sigma](double v) { return gaussian_of(v, sigma); });
            return d;
          },
          [&](const DeepGaussianKernel& k) -> Matrix {
            const double sigma_phi = std::exp(k.log_sigma_phi);
            const double sigma_q = std::exp(k.log_sigma_q);
            const double eps = k.epsilon();
            Matrix out = sq_dists(a.features, b.features, symmetric);
            const Matrix dx = sq_dists(*a.inputs, *b.inputs, symmetric);
            for (Index j = 0; j < out.cols(); ++j)
              for (Index i = 0; i < out.rows(); ++i)
                out(i, j) = ((1.0 - eps) * gaussian_of(out(i, j), sigma_phi) + eps) * gaussian_of(dx(i, j), sigma_q);
            return out;
          },
          [&](const SignScoreKernel&) -> Matrix {
            const Vector ia = (a.scores.array() > 0.0).cast<double>();
            const Vector ib = (b.scores.array() > 0.0).cast<double>();
            return 0.25 * ia * ib.transpose();
          },
          [&](const LinearScoreKernel&) -> Matrix { return a.scores * b.scores.transpose(); },
          [&](const TanhScoreKernel&) -> Matrix { return a.scores * b.scores.transpose(); },
          [&](const MklKernel& k) -> Matrix {
            Matrix out = Matrix::Zero(a.inputs->rows(), b.inputs->rows());
            for (std::size_t i = 0; i < k.bases.size(); ++i) {
              const Embedding ea = embed(k.bases[i], *a.inputs);
              if (symmetric) {
                out += k.weights[i] * gram_from_embeddings(k.bases[i], ea, ea, true);
              } else {
                const Embedding eb = embed(k.bases[i], *b.inputs);
                out += k.weights[i] * gram_from_embeddings(k.bases[i], ea, eb, false);
              }
            }
            return out;
          },
      },
      spec.kernel);
}

}  // namespace

Matrix gram_block(const KernelSpec& spec, const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("gram_block: dimension mismatch");
  const Embedding ea = embed(spec, a);
  const Embedding eb = embed(spec, b);
  return gram_from_embeddings(spec, ea, eb, false);
}

Matrix gram_block(const KernelSpec& spec, const SampleSet& a, const SampleSet& b) {
  return gram_block(spec, a.points(), b.points());
}

Matrix gram_symmetric(const KernelSpec& spec, const Matrix& a) {
  const Embedding ea = embed(spec, a);
  return gram_from_embeddings(spec, ea, ea, true);
}

double eval_kernel(const KernelSpec& spec, const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw std::invalid_argument("eval_kernel: dimension mismatch");
  return gram_block(spec, Matrix(x.transpose()), Matrix(y.transpose()))(0, 0);
}

Vector kernel_pairs(const KernelSpec& spec, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("kernel_pairs: shape mismatch");
  if (const auto* mkl = std::get_if<MklKernel>(&spec.kernel)) {
    Vector out = Vector::Zero(a.rows());
    for (std::size_t i = 0; i < mkl->bases.size(); ++i) out += mkl->weights[i] * kernel_pairs(mkl->bases[i], a, b);
    return out;
  }
  const Embedding ea = embed(spec, a);
  const Embedding eb = embed(spec, b);
  const Index n = a.rows();
  Vector out(n);
  auto row_sq = [](const Matrix& m1, const Matrix& m2) { return (m1 - m2).rowwise().squaredNorm().eval(); };
  std::visit(Overloaded{
                 [&](const GaussianKernel& k) {
                   const Vector d = row_sq(a, b);
                   for (Index i = 0; i < n; ++i) out(i) = gaussian_of(d(i), k.sigma());
                 },
                 [&](const FeatureGaussianKernel& k) {
                   const Vector d = row_sq(ea.features, eb.features);
                   for (Index i = 0; i < n; ++i) out(i) = gaussian_of(d(i), std::exp(k.log_sigma_phi));
                 },
                 [&](const DeepGaussianKernel& k) {
                   const Vector dphi = row_sq(ea.features, eb.features);
                   const Vector dx = row_sq(a, b);
                   const double eps = k.epsilon();
                   for (Index i = 0; i < n; ++i) {
                     out(i) = ((1.0 - eps) * gaussian_of(dphi(i), std::exp(k.log_sigma_phi)) + eps) *
                              gaussian_of(dx(i), std::exp(k.log_sigma_q));
                   }
                 },
                 [&](const SignScoreKernel&) {
                   for (Index i = 0; i < n; ++i) out(i) = (ea.scores(i) > 0.0 && eb.scores(i) > 0.0) ? 0.25 : 0.0;
                 },
                 [&](const LinearScoreKernel&) { out = ea.scores.cwiseProduct(eb.scores); },
                 [&](const TanhScoreKernel&) { out = ea.scores.cwiseProduct(eb.scores); },
                 [&](const MklKernel&) {},
             },
             spec.kernel);
  return out;
}

HMatrix h_from_pooled_gram(const Matrix& pooled_gram, Index n) {
  if (pooled_gram.rows() != 2 * n || pooled_gram.cols() != 2 * n) throw std::invalid_argument("pooled gram has wrong shape");
  const auto kxy = pooled_gram.block(0, n, n, n);
  HMatrix h;
  h.entries = pooled_gram.topLeftCorner(n, n) + pooled_gram.bottomRightCorner(n, n) - kxy - kxy.transpose();
  return h;
}

HMatrix build_h_matrix(const KernelSpec& spec, const SampleSet& x, const SampleSet& y) {
  if (x.size() != y.size()) throw std::invalid_argument("build_h_matrix: X and Y must have the same size");
  if (x.dim() != y.dim()) throw std::invalid_argument("build_h_matrix: dimension mismatch");
  const SampleSet pooled = SampleSet::concat(x, y);
  return h_from_pooled_gram(gram_symmetric(spec, pooled.points()), x.size());
}

}  // namespace learnmmd

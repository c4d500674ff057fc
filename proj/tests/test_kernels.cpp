#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "learnmmd/estimators.hpp"
#include "learnmmd/kernels.hpp"
#include "oracle.hpp"

using namespace learnmmd;

namespace {

NetParams random_net(Index d, Index width, std::size_t depth, std::uint64_t seed) {
  NetParams net = init_net(d, width, width, depth, seed);
  std::mt19937_64 rng(seed + 100);
  for (auto& layer : net.layers) layer.bias = oracle::random_matrix(layer.bias.size(), 1, rng, 0.3);
  return net;
}

DeepGaussianKernel random_deep(Index d, std::uint64_t seed) {
  DeepGaussianKernel k;
  k.net = random_net(d, 6, 3, seed);
  k.log_sigma_phi = std::log(0.7);
  k.log_sigma_q = std::log(1.3);
  k.logit_epsilon = logit(0.1);
  return k;
}

ClassifierHead random_head(Index dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ClassifierHead h;
  h.w = oracle::random_matrix(dim, 1, rng);
  h.b = 0.1;
  return h;
}

// Every variant on random parameters for input dimension d.
std::vector<KernelSpec> all_kernels(Index d, std::uint64_t seed) {
  std::vector<KernelSpec> out;
  out.push_back(GaussianKernel{std::log(0.8)});
  out.push_back(FeatureGaussianKernel{random_net(d, 5, 2, seed), std::log(0.5)});
  out.push_back(random_deep(d, seed + 1));
  const NetParams net = random_net(d, 4, 2, seed + 2);
  const ClassifierHead head = random_head(4, seed + 3);
  out.push_back(SignScoreKernel{net, head});
  out.push_back(LinearScoreKernel{net, head});
  out.push_back(TanhScoreKernel{net, head, 3.0});
  out.push_back(MklKernel{{0.3, 0.7}, {GaussianKernel{std::log(0.5)}, GaussianKernel{std::log(2.0)}}});
  return out;
}

double score_of(const NetParams& net, const ClassifierHead& head, const Vector& x) {
  return head.w.dot(oracle::features(net, x)) + head.b;
}

}  // namespace

TEST(EvalKernel, GaussianAtZeroDistanceIsOne) {
  const Vector x = Vector::Constant(3, 0.4);
  EXPECT_EQ(eval_kernel(GaussianKernel{std::log(0.3)}, x, x), 1.0);
}

TEST(EvalKernel, DeepAtZeroDistanceIsOne) {
  const Vector x = Vector::LinSpaced(3, -1, 2);
  EXPECT_NEAR(eval_kernel(random_deep(3, 2), x, x), 1.0, 1e-15);
}

TEST(EvalKernel, ClosedForms) {
  std::mt19937_64 rng(5);
  const Index d = 3;
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = oracle::random_matrix(d, 1, rng);
    const Vector y = oracle::random_matrix(d, 1, rng);
    EXPECT_NEAR(eval_kernel(GaussianKernel{std::log(0.9)}, x, y), oracle::gaussian(x, y, 0.9), 1e-14);

    const DeepGaussianKernel deep = random_deep(d, 10 + static_cast<std::uint64_t>(trial));
    EXPECT_NEAR(eval_kernel(deep, x, y), oracle::deep_kernel(deep.net, 0.7, 1.3, 0.1, x, y), 1e-13);

    const NetParams net = random_net(d, 4, 2, 30 + static_cast<std::uint64_t>(trial));
    const ClassifierHead head = random_head(4, 40 + static_cast<std::uint64_t>(trial));
    const double fx = score_of(net, head, x), fy = score_of(net, head, y);
    EXPECT_NEAR(eval_kernel(LinearScoreKernel{net, head}, x, y), fx * fy, 1e-12);
    EXPECT_EQ(eval_kernel(SignScoreKernel{net, head}, x, y), (fx > 0 && fy > 0) ? 0.25 : 0.0);
    EXPECT_NEAR(eval_kernel(TanhScoreKernel{net, head, 2.5}, x, y), std::tanh(fx / 2.5) * std::tanh(fy / 2.5), 1e-14);
    const MklKernel mkl{{0.2, 1.5}, {GaussianKernel{std::log(0.4)}, GaussianKernel{std::log(3.0)}}};
    EXPECT_NEAR(eval_kernel(mkl, x, y), 0.2 * oracle::gaussian(x, y, 0.4) + 1.5 * oracle::gaussian(x, y, 3.0), 1e-14);
  }
}

TEST(EvalKernel, DeepFarApartTendsToEpsilonTimesQ) {
  DeepGaussianKernel k = random_deep(2, 3);
  const Vector x = Vector::Zero(2);
  for (double sep : {1.0, 3.0, 10.0, 40.0}) {
    const Vector y = Vector::Constant(2, sep);
    const double v = eval_kernel(k, x, y);
    EXPECT_GE(v, 0.0);
    EXPECT_NEAR(v, oracle::deep_kernel(k.net, 0.7, 1.3, 0.1, x, y), 1e-14);
    EXPECT_GE(v, 0.1 * oracle::gaussian(x, y, 1.3) - 1e-15);
  }
  EXPECT_LT(eval_kernel(k, x, Vector::Constant(2, 40.0)), 1e-300);
}

TEST(EvalKernel, SignAtExactlyZeroScoreIsZero) {
  NetParams net = init_net(2, 3, 3, 2, 1);
  ClassifierHead head;
  head.w = Vector::Zero(3);
  head.b = 0.0;
  const Vector x = Vector::Ones(2);
  EXPECT_EQ(eval_kernel(SignScoreKernel{net, head}, x, x), 0.0);
}

TEST(EvalKernel, DimensionMismatch) {
  const DeepGaussianKernel k = random_deep(3, 1);
  EXPECT_THROW(eval_kernel(k, Vector::Zero(2), Vector::Zero(2)), std::invalid_argument);
  EXPECT_THROW(eval_kernel(GaussianKernel{}, Vector::Zero(2), Vector::Zero(3)), std::invalid_argument);
}

TEST(EvalKernel, Properties) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const auto kernels = all_kernels(2, 500 + static_cast<std::uint64_t>(trial));
    const Vector x = oracle::random_matrix(2, 1, rng, 2.0);
    const Vector y = oracle::random_matrix(2, 1, rng, 2.0);
    for (const auto& k : kernels) {
      SCOPED_TRACE(k.name());
      EXPECT_GE(eval_kernel(k, x, x), 0.0);
      EXPECT_NEAR(eval_kernel(k, x, y), eval_kernel(k, y, x), 1e-15);
    }
    EXPECT_EQ(eval_kernel(kernels[0], x, x), 1.0);
    EXPECT_NEAR(eval_kernel(kernels[2], x, x), 1.0, 1e-15);
    for (std::size_t i : {0u, 1u, 2u}) {
      const double v = eval_kernel(kernels[i], x, y);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    const double s = eval_kernel(kernels[3], x, y);
    EXPECT_TRUE(s == 0.0 || s == 0.25);
    const double t = eval_kernel(kernels[5], x, y);
    EXPECT_GE(t, -1.0);
    EXPECT_LE(t, 1.0);
  }
}

TEST(EvalKernel, EpsilonParameterizations) {
  DeepGaussianKernel k;
  k.logit_epsilon = 0.0;
  EXPECT_DOUBLE_EQ(k.epsilon(), 0.5);
  k.logit_epsilon = 40.0;
  EXPECT_LE(k.epsilon(), 1.0);
  EXPECT_GT(k.epsilon(), 1.0 - 1e-15);
  k.epsilon_param = EpsilonParam::Exp;
  k.logit_epsilon = std::log(0.02);
  EXPECT_NEAR(k.epsilon(), 0.02, 1e-16);
}

TEST(GramBlock, SingletonIsKernelValue) {
  const Matrix a = Matrix::Constant(1, 2, 0.3);
  const Matrix g = gram_block(random_deep(2, 4), a, a);
  ASSERT_EQ(g.rows(), 1);
  ASSERT_EQ(g.cols(), 1);
  EXPECT_NEAR(g(0, 0), 1.0, 1e-15);
}

TEST(GramBlock, MatchesScalarEvaluationExactly) {
  std::mt19937_64 rng(12);
  const Matrix a = oracle::random_matrix(7, 2, rng);
  const Matrix b = oracle::random_matrix(5, 2, rng);
  for (const auto& k : all_kernels(2, 3)) {
    SCOPED_TRACE(k.name());
    const Matrix g = gram_block(k, a, b);
    const Matrix s = gram_symmetric(k, a);
    for (Index i = 0; i < a.rows(); ++i) {
      for (Index j = 0; j < b.rows(); ++j)
        EXPECT_EQ(g(i, j), eval_kernel(k, a.row(i).transpose(), b.row(j).transpose()));
      for (Index j = 0; j < a.rows(); ++j)
        EXPECT_EQ(s(i, j), eval_kernel(k, a.row(i).transpose(), a.row(j).transpose()));
    }
    const Vector pairs = kernel_pairs(k, a.topRows(5), b);
    for (Index i = 0; i < 5; ++i) EXPECT_EQ(pairs(i), g(i, i));
  }
}

TEST(GramBlock, GaussianGramIsPsd) {
  std::mt19937_64 rng(13);
  const Matrix a = oracle::random_matrix(5, 2, rng);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram_symmetric(GaussianKernel{0.0}, a));
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-8);
}

TEST(GramBlock, PsdForPositiveDefiniteFamilies) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = oracle::random_matrix(12, 2, rng);
    const auto kernels = all_kernels(2, 900 + static_cast<std::uint64_t>(trial));
    for (std::size_t i : {0u, 1u, 2u, 6u}) {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(gram_symmetric(kernels[i], a));
      EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-8) << kernels[i].name();
    }
  }
}

TEST(GramBlock, DimensionMismatch) {
  EXPECT_THROW(gram_block(GaussianKernel{}, Matrix::Zero(2, 2), Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST(HMatrix, ConstantKernelGivesZero) {
  std::mt19937_64 rng(3);
  ClassifierHead head;
  head.w = Vector::Zero(3);
  head.b = 1.7;
  const LinearScoreKernel constant{init_net(2, 3, 3, 2, 5), head};
  const SampleSet x(oracle::random_matrix(6, 2, rng));
  const SampleSet y(oracle::random_matrix(6, 2, rng));
  EXPECT_EQ(build_h_matrix(constant, x, y).entries.cwiseAbs().maxCoeff(), 0.0);
}

TEST(HMatrix, SingletonFormula) {
  const Vector x = Vector::Constant(2, 0.1), y = Vector::Constant(2, 0.9);
  const KernelSpec k = random_deep(2, 6);
  const HMatrix h = build_h_matrix(k, SampleSet(x.transpose()), SampleSet(y.transpose()));
  ASSERT_EQ(h.n(), 1);
  EXPECT_NEAR(h.entries(0, 0), eval_kernel(k, x, x) + eval_kernel(k, y, y) - 2 * eval_kernel(k, x, y), 1e-15);
}

TEST(HMatrix, EqualsSumOfGramBlocksAndBruteForce) {
  std::mt19937_64 rng(4);
  const Matrix x = oracle::random_matrix(4, 2, rng);
  const Matrix y = oracle::random_matrix(4, 2, rng);
  for (const auto& k : all_kernels(2, 8)) {
    SCOPED_TRACE(k.name());
    const HMatrix h = build_h_matrix(k, SampleSet(x), SampleSet(y));
    const Matrix composed = gram_block(k, x, x) + gram_block(k, y, y) - gram_block(k, x, y) - gram_block(k, y, x);
    EXPECT_LT((h.entries - composed).cwiseAbs().maxCoeff(), 1e-14);
    const Matrix brute =
        oracle::h_matrix([&](const Vector& a, const Vector& b) { return eval_kernel(k, a, b); }, x, y);
    EXPECT_LT((h.entries - brute).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((h.entries - h.entries.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(HMatrix, BoundedByFourNu) {
  std::mt19937_64 rng(40);
  for (int trial = 0; trial < 20; ++trial) {
    const SampleSet x(oracle::random_matrix(8, 2, rng, 2.0));
    const SampleSet y(oracle::random_matrix(8, 2, rng, 2.0));
    const auto kernels = all_kernels(2, 60 + static_cast<std::uint64_t>(trial));
    for (std::size_t i : {0u, 1u, 2u}) EXPECT_LE(build_h_matrix(kernels[i], x, y).entries.cwiseAbs().maxCoeff(), 4.0);
    EXPECT_LE(build_h_matrix(kernels[3], x, y).entries.cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(HMatrix, FromPooledGramMatchesDirect) {
  std::mt19937_64 rng(41);
  const Matrix x = oracle::random_matrix(5, 2, rng);
  const Matrix y = oracle::random_matrix(5, 2, rng);
  Matrix pooled(10, 2);
  pooled << x, y;
  const KernelSpec k = random_deep(2, 9);
  const HMatrix a = h_from_pooled_gram(gram_symmetric(k, pooled), 5);
  const HMatrix b = build_h_matrix(k, SampleSet(x), SampleSet(y));
  EXPECT_LT((a.entries - b.entries).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(h_from_pooled_gram(Matrix::Zero(9, 9), 5), std::invalid_argument);
}

TEST(HMatrix, SizeMismatch) {
  EXPECT_THROW(build_h_matrix(GaussianKernel{}, SampleSet(Matrix::Zero(3, 2)), SampleSet(Matrix::Zero(4, 2))),
               std::invalid_argument);
}

TEST(HMatrix, MklLinearity) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const SampleSet x(oracle::random_matrix(7, 2, rng));
    const SampleSet y(oracle::random_matrix(7, 2, rng));
    std::uniform_real_distribution<double> u(0.0, 2.0);
    const std::vector<KernelSpec> bases{GaussianKernel{std::log(0.3)}, random_deep(2, 70 + static_cast<std::uint64_t>(trial)),
                                        GaussianKernel{std::log(2.0)}};
    const std::vector<double> w{u(rng), u(rng), u(rng)};
    Matrix expected = Matrix::Zero(7, 7);
    for (std::size_t i = 0; i < 3; ++i) expected += w[i] * build_h_matrix(bases[i], x, y).entries;
    const HMatrix h = build_h_matrix(MklKernel{w, bases}, x, y);
    EXPECT_LT((h.entries - expected).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Kernels, DeepGaussianSeparatesWithConstantFeatures) {
  // Zero weights make phi constant, so only q can tell the samples apart.
  DeepGaussianKernel k = random_deep(2, 1);
  for (auto& layer : k.net.layers) {
    layer.weight.setZero();
    layer.bias.setZero();
  }
  BlobSpec spec;
  spec.n_per_mode = 20;
  spec.seed = 3;
  auto [p, unused] = generate_blob(spec);
  const SampleSet q(p.points().array() + 0.5);
  const HMatrix h = build_h_matrix(k, p, q);
  const double stat = mmd2_u(h);
  const double se = std::sqrt(variance_hat(h, 0.0) / static_cast<double>(p.size()));
  EXPECT_GT(stat, 5 * se);
}

TEST(Kernels, SquaredDistancesNeverNegative) {
  Matrix a(3, 2);
  a << 1e8, 1e8, 1e8 + 1e-8, 1e8, 1e8, 1e8;
  EXPECT_GE(pairwise_sq_dists(a).minCoeff(), 0.0);
  EXPECT_GE(pairwise_sq_dists(a, a).minCoeff(), 0.0);
  EXPECT_EQ(gram_symmetric(GaussianKernel{0.0}, a)(0, 2), 1.0);
}

TEST(Kernels, MedianDistance) {
  Matrix a(4, 1);
  a << 0, 1, 3, 7;
  // distances 1, 3, 7, 2, 6, 4 -> median of six values (3 + 4) / 2
  EXPECT_DOUBLE_EQ(median_pairwise_distance(a), 3.5);
  EXPECT_THROW(median_pairwise_distance(Matrix::Zero(1, 2)), std::invalid_argument);
}

TEST(Kernels, ValidateRejectsBadSpecs) {
  DeepGaussianKernel deep = random_deep(2, 1);
  deep.epsilon_param = EpsilonParam::Exp;
  deep.logit_epsilon = 0.5;  // exp(0.5) > 1
  EXPECT_THROW(KernelSpec(deep).validate(), std::invalid_argument);
  EXPECT_THROW(KernelSpec(MklKernel{{-0.1}, {GaussianKernel{}}}).validate(), std::invalid_argument);
  EXPECT_THROW(KernelSpec(MklKernel{{0.1, 0.2}, {GaussianKernel{}}}).validate(), std::invalid_argument);
  EXPECT_THROW(KernelSpec(GaussianKernel{std::nan("")}).validate(), std::invalid_argument);
  EXPECT_NO_THROW(KernelSpec(random_deep(2, 1)).validate());
}

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "learnmmd/estimators.hpp"
#include "learnmmd/permtest.hpp"
#include "oracle.hpp"

using namespace learnmmd;

namespace {

std::pair<SampleSet, SampleSet> blob(DatasetVariant v, int n_per_mode, std::uint64_t seed, double delta_scale = 1.0) {
  BlobSpec spec;
  spec.variant = v;
  spec.n_per_mode = n_per_mode;
  spec.seed = seed;
  spec.delta_scale = delta_scale;
  return generate_blob(spec);
}

KernelSpec median_gaussian(const SampleSet& p, const SampleSet& q) {
  return GaussianKernel{std::log(median_pairwise_distance(SampleSet::concat(p, q).points()))};
}

double seconds_of(const std::function<void()>& f) {
  double best = 1e300;
  for (int rep = 0; rep < 9; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

TEST(PermutationTest, AllPointsIdenticalGivesPValueOne) {
  const SampleSet p(Matrix::Constant(6, 2, 0.3));
  PermutationOptions o;
  o.n_perm = 30;
  const TestOutcome r = permutation_test(GaussianKernel{0.0}, p, p, o);
  EXPECT_EQ(r.statistic, 0.0);
  for (double v : r.null_samples) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
  EXPECT_FALSE(r.reject);
}

TEST(PermutationTest, SeparatedSamplesGivePValueZero) {
  std::mt19937_64 rng(1);
  const SampleSet p(oracle::random_matrix(20, 2, rng, 0.1));
  const SampleSet q(oracle::random_matrix(20, 2, rng, 0.1).array() + 5.0);
  PermutationOptions o;
  o.n_perm = 50;
  const TestOutcome r = permutation_test(GaussianKernel{0.0}, p, q, o);
  EXPECT_GT(r.statistic, *std::max_element(r.null_samples.begin(), r.null_samples.end()));
  EXPECT_EQ(r.p_value, 0.0);
  EXPECT_TRUE(r.reject);
  o.smoothed_pvalue = true;
  EXPECT_DOUBLE_EQ(permutation_test(GaussianKernel{0.0}, p, q, o).p_value, 1.0 / 51.0);
}

TEST(PermutationTest, StatisticIsUnbiasedMmd) {
  std::mt19937_64 rng(2);
  const SampleSet p(oracle::random_matrix(15, 2, rng));
  const SampleSet q(oracle::random_matrix(15, 2, rng));
  const KernelSpec k = GaussianKernel{std::log(0.7)};
  PermutationOptions o;
  o.n_perm = 10;
  EXPECT_NEAR(permutation_test(k, p, q, o).statistic, mmd2_u(build_h_matrix(k, p, q)), 1e-13);
}

TEST(PermutationTest, PValueAndDecisionDefinitions) {
  auto [p, q] = blob(DatasetVariant::Different, 5, 3);
  PermutationOptions o;
  o.n_perm = 40;
  o.alpha = 0.1;
  const TestOutcome r = permutation_test(GaussianKernel{std::log(0.3)}, p, q, o);
  ASSERT_EQ(r.null_samples.size(), 40u);
  const double count = static_cast<double>(
      std::count_if(r.null_samples.begin(), r.null_samples.end(), [&](double v) { return v >= r.statistic; }));
  EXPECT_EQ(r.p_value, count / 40.0);
  EXPECT_EQ(r.reject, r.p_value < 0.1);
  std::vector<double> sorted = r.null_samples;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(r.threshold, sorted[35]);
}

TEST(PermutationTest, ReindexingMatchesRecomputation) {
  std::mt19937_64 rng(4);
  const Matrix x = oracle::random_matrix(10, 2, rng);
  const Matrix y = oracle::random_matrix(10, 2, rng).array() + 0.2;
  Matrix pooled(20, 2);
  pooled << x, y;
  const KernelSpec k = GaussianKernel{std::log(0.9)};
  const Matrix gram = gram_symmetric(k, pooled);
  Rng prng(5);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_permutation(20, prng);
    Matrix xs(10, 2), ys(10, 2);
    for (Index i = 0; i < 10; ++i) {
      xs.row(i) = pooled.row(static_cast<Index>(a[static_cast<std::size_t>(i)]));
      ys.row(i) = pooled.row(static_cast<Index>(a[static_cast<std::size_t>(10 + i)]));
    }
    const double direct = oracle::mmd2_u(
        oracle::h_matrix([&](const Vector& u, const Vector& v) { return oracle::gaussian(u, v, 0.9); }, xs, ys));
    EXPECT_NEAR(permuted_mmd2_u(gram, a), direct, 1e-12);
  }
}

TEST(PermutationTest, DeterministicAndIndependentOfThreads) {
  auto [p, q] = blob(DatasetVariant::Different, 4, 6);
  PermutationOptions o;
  o.n_perm = 64;
  o.seed = 77;
  const KernelSpec k = GaussianKernel{std::log(0.5)};
  const TestOutcome a = permutation_test(k, p, q, o);
  o.threads = 4;
  const TestOutcome b = permutation_test(k, p, q, o);
  EXPECT_EQ(a.null_samples, b.null_samples);
  EXPECT_EQ(a.p_value, b.p_value);
  o.seed = 78;
  EXPECT_NE(permutation_test(k, p, q, o).null_samples, a.null_samples);
}

TEST(PermutationTest, Preconditions) {
  const SampleSet p(Matrix::Zero(4, 2));
  PermutationOptions o;
  EXPECT_THROW(permutation_test(GaussianKernel{}, p, SampleSet(Matrix::Zero(5, 2)), o), std::invalid_argument);
  o.n_perm = 0;
  EXPECT_THROW(permutation_test(GaussianKernel{}, p, p, o), std::invalid_argument);
  o.n_perm = 10;
  o.alpha = 1.5;
  EXPECT_THROW(permutation_test(GaussianKernel{}, p, p, o), std::invalid_argument);
  EXPECT_THROW(p_value_from_null(0.0, {}, false), std::invalid_argument);
}

TEST(PermutationTest, TypeOneCalibrationOnBlobS) {
  int rejections = 0;
  const int reps = 500;
  for (int r = 0; r < reps; ++r) {
    auto [p, q] = blob(DatasetVariant::Same, 40, 10000 + static_cast<std::uint64_t>(r));
    PermutationOptions o;
    o.seed = static_cast<std::uint64_t>(r);
    rejections += permutation_test(median_gaussian(p, q), p, q, o).reject;
  }
  const double rate = static_cast<double>(rejections) / reps;
  EXPECT_GE(rate, 0.030);
  EXPECT_LE(rate, 0.075);
}

TEST(PermutationTest, PValueIsSuperUniformUnderNull) {
  // Smaller sets and a fixed kernel; checks P(p < 0.05) <= 0.05 + 3 SE.
  int below = 0;
  const int reps = 600;
  for (int r = 0; r < reps; ++r) {
    auto [p, q] = blob(DatasetVariant::Same, 5, 50000 + static_cast<std::uint64_t>(r));
    PermutationOptions o;
    o.seed = static_cast<std::uint64_t>(r) + 1;
    o.n_perm = 200;
    below += permutation_test(GaussianKernel{std::log(0.5)}, p, q, o).p_value < 0.05;
  }
  EXPECT_LE(below / static_cast<double>(reps), 0.05 + 3 * std::sqrt(0.05 * 0.95 / reps));
}

TEST(PermutationTest, PowerGrowsWithSeparation) {
  // delta_scale above 0.03 / 0.026 would leave the Q covariances indefinite.
  const KernelSpec k = GaussianKernel{std::log(0.15)};
  auto rate = [&](double scale) {
    int rej = 0;
    for (int r = 0; r < 100; ++r) {
      auto [p, q] = blob(DatasetVariant::Different, 40, 70000 + static_cast<std::uint64_t>(r), scale);
      PermutationOptions o;
      o.seed = static_cast<std::uint64_t>(r);
      rej += permutation_test(k, p, q, o).reject;
    }
    return rej / 100.0;
  };
  const double half = rate(0.5);
  const double full = rate(1.0);
  EXPECT_GT(full, half);
  EXPECT_GT(full, 0.5);
}

TEST(PermutationTest, TimeComplexity) {
  auto [p, q] = blob(DatasetVariant::Same, 60, 1);
  const KernelSpec k = GaussianKernel{0.0};
  auto run = [&](const SampleSet& a, const SampleSet& b, int n_perm) {
    PermutationOptions o;
    o.n_perm = n_perm;
    return seconds_of([&] { permutation_test(k, a, b, o); });
  };
  const SampleSet hp = p.head(270), hq = q.head(270);
  const double base = run(hp, hq, 200);
  EXPECT_LT(run(hp, hq, 400), 3.0 * base);
  EXPECT_LT(run(p, q, 200) / run(p.head(270), q.head(270), 200), 4.5);
}

TEST(C2st, ZeroScoreGivesHalfAccuracy) {
  const NetParams net = init_net(2, 3, 3, 2, 1);
  ClassifierHead head;
  head.w = Vector::Zero(3);
  head.b = 0.0;
  std::mt19937_64 rng(1);
  const SampleSet p(oracle::random_matrix(7, 2, rng));
  const SampleSet q(oracle::random_matrix(7, 2, rng));
  const C2stStatistics s = c2st_statistics(net, head, p, q);
  EXPECT_EQ(s.accuracy, 0.5);
  EXPECT_EQ(s.mean_score_diff, 0.0);
}

TEST(C2st, PerfectSeparation) {
  // One linear layer: softplus(x_0) is increasing, so f = phi - 2 separates x_0 < 0 from x_0 > 3.
  NetParams net;
  net.layers.push_back({Matrix{{1.0, 0.0}}, Vector::Zero(1)});
  ClassifierHead head;
  head.w = Vector::Ones(1);
  head.b = -2.0;
  std::mt19937_64 rng(2);
  Matrix xp = oracle::random_matrix(10, 2, rng, 0.1);
  xp.col(0).array() += 5.0;
  Matrix xq = oracle::random_matrix(10, 2, rng, 0.1);
  xq.col(0).array() -= 5.0;
  const SampleSet p(xp), q(xq);
  const C2stStatistics s = c2st_statistics(net, head, p, q);
  EXPECT_EQ(s.accuracy, 1.0);
  EXPECT_NEAR(std::sqrt(mmd2_b(build_h_matrix(SignScoreKernel{net, head}, p, q))), 0.5, 1e-15);
}

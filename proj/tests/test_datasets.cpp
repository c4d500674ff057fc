#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <map>
#include <set>

#include "learnmmd/datasets.hpp"
#include "learnmmd/random.hpp"
#include "oracle.hpp"

using namespace learnmmd;

namespace {

// Sample mean and covariance of the rows of m.
std::pair<Vector, Matrix> moments(const Matrix& m) {
  const Vector mean = m.colwise().mean().transpose();
  const Matrix centered = m.rowwise() - mean.transpose();
  return {mean, centered.transpose() * centered / static_cast<double>(m.rows() - 1)};
}

}  // namespace

TEST(Random, DerivedSeedsDifferAndRepeat) {
  EXPECT_EQ(derive_seed(7, 1), derive_seed(7, 1));
  EXPECT_NE(derive_seed(7, 1), derive_seed(7, 2));
  EXPECT_NE(derive_seed(7, 1), derive_seed(8, 1));
  EXPECT_NE(derive_seed(7, 1, 0), derive_seed(7, 1, 1));
}

TEST(Random, PermutationIsBijection) {
  Rng rng(3);
  auto perm = random_permutation(50, rng);
  std::sort(perm.begin(), perm.end());
  std::vector<std::size_t> expected(50);
  std::iota(expected.begin(), expected.end(), 0);
  EXPECT_EQ(perm, expected);
}

TEST(Blob, SmallestSpecGivesNinePointsPerSet) {
  BlobSpec spec;
  spec.variant = DatasetVariant::Same;
  spec.n_per_mode = 1;
  spec.seed = 11;
  for (auto mode : {ModeAssignment::ExactPerMode, ModeAssignment::Multinomial}) {
    spec.assignment = mode;
    auto [p, q] = generate_blob(spec);
    EXPECT_EQ(p.size(), 9);
    EXPECT_EQ(q.size(), 9);
    EXPECT_EQ(p.dim(), 2);
    EXPECT_EQ(q.dim(), 2);
  }
}

TEST(Blob, MixtureLayout) {
  auto [p, q] = blob_mixtures(DatasetVariant::Different);
  ASSERT_EQ(p.components(), 9u);
  std::set<std::pair<double, double>> grid;
  for (std::size_t i = 0; i < 9; ++i) {
    grid.insert({p.means[i](0), p.means[i](1)});
    EXPECT_DOUBLE_EQ(p.covariances[i](0, 0), 0.03);
    EXPECT_DOUBLE_EQ(p.covariances[i](1, 1), 0.03);
    EXPECT_DOUBLE_EQ(p.covariances[i](0, 1), 0.0);
    EXPECT_DOUBLE_EQ(q.covariances[i](0, 1), blob_delta(static_cast<int>(i) + 1));
    EXPECT_DOUBLE_EQ(q.covariances[i](1, 0), blob_delta(static_cast<int>(i) + 1));
  }
  EXPECT_EQ(grid.size(), 9u);
  for (const auto& [a, b] : grid) {
    EXPECT_TRUE(a == 0 || a == 1 || a == 2);
    EXPECT_TRUE(b == 0 || b == 1 || b == 2);
  }
}

TEST(Blob, DeltaValues) {
  EXPECT_DOUBLE_EQ(blob_delta(1), -0.02);
  EXPECT_DOUBLE_EQ(blob_delta(4), -0.026);
  EXPECT_DOUBLE_EQ(blob_delta(5), 0.0);
  EXPECT_DOUBLE_EQ(blob_delta(6), 0.02);
  EXPECT_DOUBLE_EQ(blob_delta(9), 0.026);
  EXPECT_THROW(blob_delta(0), std::out_of_range);
  EXPECT_THROW(blob_delta(10), std::out_of_range);
}

TEST(Blob, SameVariantHasEqualMixtures) {
  auto [p, q] = blob_mixtures(DatasetVariant::Same);
  EXPECT_EQ(p, q);
  auto [hp, hq] = hdgm_mixtures(DatasetVariant::Same, 7);
  EXPECT_EQ(hp, hq);
  auto [dp, dq] = blob_mixtures(DatasetVariant::Different);
  EXPECT_FALSE(dp == dq);
}

TEST(Blob, SameVariantPointsAreNotIdentical) {
  BlobSpec spec;
  spec.variant = DatasetVariant::Same;
  spec.seed = 5;
  auto [p, q] = generate_blob(spec);
  EXPECT_FALSE(p == q);
}

TEST(Blob, ModeFiveCovarianceOfQ) {
  auto [p, q] = blob_mixtures(DatasetVariant::Different);
  Rng rng(21);
  GaussianMixture mode5{{q.means[4]}, {q.covariances[4]}};
  const SampleSet draws = sample_mixture(mode5, 100000, rng);
  const auto [mean, cov] = moments(draws.points());
  EXPECT_NEAR(cov(0, 0), 0.03, 0.002);
  EXPECT_NEAR(cov(1, 1), 0.03, 0.002);
  EXPECT_NEAR(cov(0, 1), 0.0, 0.002);
}

TEST(Blob, EveryModeMomentsWithinFiveStandardErrors) {
  auto [p, q] = blob_mixtures(DatasetVariant::Different);
  Rng rng(99);
  const Index n = 100000;
  for (std::size_t i = 0; i < 9; ++i) {
    GaussianMixture one{{q.means[i]}, {q.covariances[i]}};
    const auto [mean, cov] = moments(sample_mixture(one, n, rng).points());
    const double se_mean = std::sqrt(0.03 / n);
    EXPECT_NEAR(mean(0), q.means[i](0), 5 * se_mean);
    EXPECT_NEAR(mean(1), q.means[i](1), 5 * se_mean);
    // Var of a sample covariance entry for Gaussians: (s_ab^2 + s_aa s_bb) / n.
    const double c01 = q.covariances[i](0, 1);
    const double se_cov = std::sqrt((c01 * c01 + 0.03 * 0.03) / n);
    const double se_var = std::sqrt(2.0 * 0.03 * 0.03 / n);
    EXPECT_NEAR(cov(0, 1), c01, 5 * se_cov);
    EXPECT_NEAR(cov(0, 0), 0.03, 5 * se_var);
  }
}

TEST(Blob, ExactAssignmentPutsNPerModeInEachMode) {
  auto [p, q] = blob_mixtures(DatasetVariant::Different);
  // Shrink the spread so every draw can be attributed to its mode.
  for (auto& c : p.covariances) c *= 1e-4;
  Rng rng(8);
  const SampleSet s = sample_mixture_exact(p, 13, rng);
  ASSERT_EQ(s.size(), 9 * 13);
  std::map<std::pair<long, long>, int> counts;
  for (Index i = 0; i < s.size(); ++i) counts[{std::lround(s.points()(i, 0)), std::lround(s.points()(i, 1))}]++;
  ASSERT_EQ(counts.size(), 9u);
  for (const auto& [mode, c] : counts) EXPECT_EQ(c, 13);

  BlobSpec spec;
  spec.n_per_mode = 13;
  spec.assignment = ModeAssignment::ExactPerMode;
  EXPECT_EQ(generate_blob(spec).first.size(), 9 * 13);
}

TEST(Blob, Deterministic) {
  BlobSpec spec;
  spec.seed = 1234;
  auto a = generate_blob(spec);
  auto b = generate_blob(spec);
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
  spec.seed = 1235;
  auto c = generate_blob(spec);
  EXPECT_FALSE(a.first == c.first);
}

TEST(Blob, RejectsNonPositiveCount) {
  BlobSpec spec;
  spec.n_per_mode = 0;
  EXPECT_THROW(generate_blob(spec), std::invalid_argument);
}

TEST(Hdgm, ShapesAndSameLaw) {
  HdgmSpec spec;
  spec.variant = DatasetVariant::Same;
  spec.d = 10;
  spec.n_total = 100;
  spec.seed = 4;
  auto [p, q] = generate_hdgm(spec);
  EXPECT_EQ(p.size(), 100);
  EXPECT_EQ(p.dim(), 10);
  EXPECT_EQ(q.size(), 100);
  EXPECT_EQ(q.dim(), 10);
  auto [mp, mq] = hdgm_mixtures(DatasetVariant::Same, 10);
  EXPECT_EQ(mp, mq);
}

TEST(Hdgm, ComponentTwoMean) {
  auto [p, q] = hdgm_mixtures(DatasetVariant::Different, 10);
  ASSERT_EQ(p.components(), 2u);
  EXPECT_TRUE(p.means[0].isZero());
  EXPECT_TRUE(p.means[1].isApprox(Vector::Constant(10, 0.5)));
  Rng rng(17);
  GaussianMixture two{{p.means[1]}, {p.covariances[1]}};
  const Vector mean = sample_mixture(two, 100000, rng).points().colwise().mean().transpose();
  for (Index k = 0; k < 10; ++k) EXPECT_NEAR(mean(k), 0.5, 0.01);
}

TEST(Hdgm, DifferentVariantLeadingBlock) {
  auto [p, q] = hdgm_mixtures(DatasetVariant::Different, 2);
  ASSERT_EQ(q.components(), 2u);
  std::set<double> offdiag;
  for (std::size_t c = 0; c < 2; ++c) {
    EXPECT_DOUBLE_EQ(q.covariances[c](0, 0), 1.0);
    EXPECT_DOUBLE_EQ(q.covariances[c](1, 1), 1.0);
    EXPECT_DOUBLE_EQ(q.covariances[c](0, 1), q.covariances[c](1, 0));
    offdiag.insert(q.covariances[c](0, 1));
    EXPECT_TRUE(p.covariances[c].isIdentity());
  }
  EXPECT_EQ(offdiag, (std::set<double>{-0.5, 0.5}));

  auto [p5, q5] = hdgm_mixtures(DatasetVariant::Different, 5);
  for (std::size_t c = 0; c < 2; ++c) {
    Matrix rest = q5.covariances[c];
    rest(0, 1) = rest(1, 0) = 0.0;
    EXPECT_TRUE(rest.isIdentity());
  }
}

TEST(Hdgm, RejectsBadSpec) {
  HdgmSpec spec;
  spec.d = 1;
  EXPECT_THROW(generate_hdgm(spec), std::invalid_argument);
  spec.d = 3;
  spec.n_total = 1;
  EXPECT_THROW(generate_hdgm(spec), std::invalid_argument);
}

TEST(Csv, ParsesRowsInOrder) {
  const SampleSet s = parse_csv("1,2,3,4\n5,6,7,8\n-1.5,2e3,0,1e-3\n");
  ASSERT_EQ(s.size(), 3);
  ASSERT_EQ(s.dim(), 4);
  EXPECT_DOUBLE_EQ(s.points()(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(s.points()(1, 3), 8.0);
  EXPECT_DOUBLE_EQ(s.points()(2, 1), 2000.0);
  EXPECT_DOUBLE_EQ(s.points()(2, 3), 1e-3);
}

TEST(Csv, EmptyInput) {
  try {
    parse_csv("");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::EmptyInput);
    EXPECT_STREQ(e.what(), "empty input");
  }
  EXPECT_THROW(parse_csv("\n\n"), ParseError);
}

TEST(Csv, RaggedRowNamesLine) {
  try {
    parse_csv("1,2,3,4\n1,2,3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::RaggedRow);
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Csv, NonNumericField) {
  try {
    parse_csv("1,2\n3,abc\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::NonNumeric);
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Csv, HeaderAndDelimiter) {
  const SampleSet s = parse_csv("a;b\n1;2\n3;4\n", ';', true);
  EXPECT_EQ(s.size(), 2);
  EXPECT_EQ(s.dim(), 2);
  EXPECT_THROW(parse_csv("a;b\n1;2\n", ';', false), ParseError);
}

TEST(Csv, RoundTripIsExact) {
  std::mt19937_64 rng(2);
  const SampleSet s(oracle::random_matrix(20, 3, rng, 1e3));
  oracle::TempDir dir("csv");
  write_csv(dir.path() / "s.csv", s);
  EXPECT_EQ(load_csv(dir.path() / "s.csv"), s);
}

TEST(Csv, MissingFile) {
  try {
    load_csv("/nonexistent/file.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::Io);
  }
}

TEST(Split, HalvesAreDisjointAndExhaustive) {
  std::mt19937_64 rng(1);
  const SampleSet p(oracle::random_matrix(100, 2, rng));
  const SampleSet q(oracle::random_matrix(100, 2, rng));
  const SplitPair s = split(p, q, 0.5, 42);
  EXPECT_EQ(s.train_p.size(), 50);
  EXPECT_EQ(s.test_p.size(), 50);
  EXPECT_EQ(s.train_q.size(), 50);
  EXPECT_EQ(s.test_q.size(), 50);
  for (const auto& [train, test] : {std::pair{s.train_index_p, s.test_index_p}, std::pair{s.train_index_q, s.test_index_q}}) {
    std::set<std::size_t> all(train.begin(), train.end());
    for (auto i : test) EXPECT_TRUE(all.insert(i).second);
    EXPECT_EQ(all.size(), 100u);
    EXPECT_EQ(*all.rbegin(), 99u);
  }
  for (std::size_t k = 0; k < s.train_index_p.size(); ++k)
    EXPECT_EQ(s.train_p.points().row(static_cast<Index>(k)), p.points().row(static_cast<Index>(s.train_index_p[k])));
}

TEST(Split, DeterministicUnderSeed) {
  std::mt19937_64 rng(1);
  const SampleSet p(oracle::random_matrix(30, 2, rng));
  const SampleSet q(oracle::random_matrix(30, 2, rng));
  EXPECT_EQ(split(p, q, 0.3, 9).train_index_p, split(p, q, 0.3, 9).train_index_p);
  EXPECT_NE(split(p, q, 0.3, 9).train_index_p, split(p, q, 0.3, 10).train_index_p);
}

TEST(Split, RejectsBadInput) {
  std::mt19937_64 rng(1);
  const SampleSet p(oracle::random_matrix(10, 2, rng));
  const SampleSet q(oracle::random_matrix(11, 2, rng));
  EXPECT_THROW(split(p, q, 0.5, 0), std::invalid_argument);
  EXPECT_THROW(split(p, p, 0.0, 0), std::invalid_argument);
  EXPECT_THROW(split(p, p, 1.0, 0), std::invalid_argument);
}

TEST(Split, SuggestedSizeAtTwoHundred) {
  std::mt19937_64 rng(1);
  const SampleSet p(oracle::random_matrix(200, 2, rng));
  const SampleSet q(oracle::random_matrix(200, 2, rng));
  const double expected = std::min(199.0, std::round(std::pow(200.0 * std::sqrt(std::log(200.0)), 0.75)));
  const Index n_train = suggest_train_size(200);
  EXPECT_EQ(n_train, static_cast<Index>(expected));
  const SplitPair s = split_with_size(p, q, n_train, 3);
  EXPECT_EQ(s.train_p.size(), static_cast<Index>(expected));
  EXPECT_EQ(s.test_p.size(), 200 - static_cast<Index>(expected));
}

TEST(SuggestTrainSize, Values) {
  const Index small = suggest_train_size(4);
  EXPECT_GE(small, 1);
  EXPECT_LE(small, 3);
  EXPECT_EQ(suggest_train_size(1000), std::llround(std::pow(1000.0 * std::sqrt(std::log(1000.0)), 0.75)));
  EXPECT_THROW(suggest_train_size(3), std::invalid_argument);
  EXPECT_THROW(suggest_train_size(100, 0.0), std::invalid_argument);
}

TEST(SuggestTrainSize, MonotoneInN) {
  Index prev = suggest_train_size(10);
  for (Index n = 11; n <= 100000; n += (n < 1000 ? 1 : 97)) {
    const Index cur = suggest_train_size(n);
    ASSERT_GE(cur, prev) << "N=" << n;
    prev = cur;
  }
}

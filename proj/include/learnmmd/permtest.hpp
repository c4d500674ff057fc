#pragma once

#include <cstdint>
#include <vector>

#include "learnmmd/datasets.hpp"
#include "learnmmd/kernels.hpp"
#include "learnmmd/network.hpp"

namespace learnmmd {

inline constexpr int kDefaultPermutations = 100;

struct PermutationOptions {
  int n_perm = kDefaultPermutations;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  // (1 + #{perm >= est}) / (1 + n_perm) instead of #{perm >= est} / n_perm.
  bool smoothed_pvalue = false;
  int threads = 1;
};

struct TestOutcome {
  double statistic = 0.0;  // mmd2_u on the unpermuted test split
  std::vector<double> null_samples;
  double p_value = 1.0;
  bool reject = false;
  double alpha = 0.05;
  // Empirical (1 - alpha) quantile of the null samples; diagnostic only.
  double threshold = 0.0;
};

TestOutcome permutation_test(const KernelSpec& spec, const SampleSet& test_p, const SampleSet& test_q,
                             const PermutationOptions& options);

// Same test from the Gram matrix of the pooled sample [P; Q] (P first).
TestOutcome permutation_test_from_gram(const Matrix& pooled_gram, Index n, const PermutationOptions& options);

// mmd2_u of the split that puts pooled points assignment[0..n) in the first
// sample and assignment[n..2n) in the second.
double permuted_mmd2_u(const Matrix& pooled_gram, const std::vector<std::size_t>& assignment);

double p_value_from_null(double statistic, const std::vector<double>& null_samples, bool smoothed);

struct C2stStatistics {
  double accuracy = 0.5;
  double mean_score_diff = 0.0;
};

// accuracy = (#{f(x) > 0} + #{f(y) <= 0}) / 2n
C2stStatistics c2st_statistics(const NetParams& net, const ClassifierHead& head, const SampleSet& test_p,
                               const SampleSet& test_q);

}  // namespace learnmmd

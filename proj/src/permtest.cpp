#include "learnmmd/permtest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace learnmmd {

double permuted_mmd2_u(const Matrix& pooled_gram, const std::vector<std::size_t>& assignment) {
  const Index total = pooled_gram.rows();
  if (pooled_gram.cols() != total || total % 2 != 0 || static_cast<Index>(assignment.size()) != total) {
    throw std::invalid_argument("permuted_mmd2_u: shape mismatch");
  }
  const Index n = total / 2;
  Vector s(total);
  for (Index i = 0; i < total; ++i) s(static_cast<Index>(assignment[static_cast<std::size_t>(i)])) = i < n ? 1.0 : -1.0;
  // sum_{i != j} H_ij = s^T K s - tr(K) + 2 sum_i K(a_i, a_{n+i})
  double paired = 0.0;
  for (Index i = 0; i < n; ++i) {
    paired += pooled_gram(static_cast<Index>(assignment[static_cast<std::size_t>(i)]),
                          static_cast<Index>(assignment[static_cast<std::size_t>(n + i)]));
  }
  const double quad = s.dot(pooled_gram.selfadjointView<Eigen::Upper>() * s);
  const double nd = static_cast<double>(n);
  return (quad - pooled_gram.trace() + 2.0 * paired) / (nd * (nd - 1.0));
}

double p_value_from_null(double statistic, const std::vector<double>& null_samples, bool smoothed) {
  if (null_samples.empty()) throw std::invalid_argument("p_value_from_null: no null samples");
  const auto count = static_cast<double>(
      std::count_if(null_samples.begin(), null_samples.end(), [statistic](double v) { return v >= statistic; }));
  const double m = static_cast<double>(null_samples.size());
  return smoothed ? (1.0 + count) / (1.0 + m) : count / m;
}

TestOutcome permutation_test_from_gram(const Matrix& pooled_gram, Index n, const PermutationOptions& options) {
  if (n < 2) throw std::invalid_argument("permutation_test: need at least two points per sample");
  if (pooled_gram.rows() != 2 * n || pooled_gram.cols() != 2 * n) {
    throw std::invalid_argument("permutation_test: pooled Gram matrix has the wrong size");
  }
  if (options.n_perm < 1) throw std::invalid_argument("permutation_test: n_perm must be >= 1");
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw std::invalid_argument("permutation_test: alpha must lie in (0, 1)");

  const auto total = static_cast<std::size_t>(2 * n);
  std::vector<std::size_t> identity(total);
  for (std::size_t i = 0; i < total; ++i) identity[i] = i;

  TestOutcome out;
  out.alpha = options.alpha;
  out.statistic = permuted_mmd2_u(pooled_gram, identity);
  out.null_samples.assign(static_cast<std::size_t>(options.n_perm), 0.0);

  // Permutations go through in blocks so each pass over the Gram matrix serves
  // up to kBlock sign vectors (one GEMM instead of kBlock GEMVs).
  constexpr std::size_t kBlock = 256;
  const double trace = pooled_gram.trace();
  const double nd = static_cast<double>(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    Matrix signs(static_cast<Index>(total), static_cast<Index>(std::min(kBlock, end - begin)));
    std::vector<double> paired(kBlock);
    for (std::size_t b0 = begin; b0 < end; b0 += kBlock) {
      const std::size_t width = std::min(kBlock, end - b0);
      for (std::size_t c = 0; c < width; ++c) {
        Rng rng(derive_seed(options.seed, b0 + c));
        const auto a = random_permutation(total, rng);
        const auto col = static_cast<Index>(c);
        paired[c] = 0.0;
        for (Index i = 0; i < n; ++i) {
          signs(static_cast<Index>(a[static_cast<std::size_t>(i)]), col) = 1.0;
          signs(static_cast<Index>(a[static_cast<std::size_t>(n + i)]), col) = -1.0;
          paired[c] += pooled_gram(static_cast<Index>(a[static_cast<std::size_t>(i)]),
                                   static_cast<Index>(a[static_cast<std::size_t>(n + i)]));
        }
      }
      const auto block = signs.leftCols(static_cast<Index>(width));
      const Matrix ks = pooled_gram * block;
      for (std::size_t c = 0; c < width; ++c) {
        const auto col = static_cast<Index>(c);
        const double quad = block.col(col).dot(ks.col(col));
        out.null_samples[b0 + c] = (quad - trace + 2.0 * paired[c]) / (nd * (nd - 1.0));
      }
    }
  };
  const auto n_perm = static_cast<std::size_t>(options.n_perm);
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(options.threads, 1)), n_perm);
  if (workers <= 1) {
    work(0, n_perm);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w * n_perm / workers, (w + 1) * n_perm / workers);
    for (auto& t : pool) t.join();
  }

  out.p_value = p_value_from_null(out.statistic, out.null_samples, options.smoothed_pvalue);
  out.reject = out.p_value < options.alpha;
  std::vector<double> sorted = out.null_samples;
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(std::ceil((1.0 - options.alpha) * static_cast<double>(n_perm)));
  out.threshold = sorted[std::clamp<std::size_t>(rank, 1, n_perm) - 1];
  return out;
}

TestOutcome permutation_test(const KernelSpec& spec, const SampleSet& test_p, const SampleSet& test_q,
                             const PermutationOptions& options) {
  if (test_p.size() != test_q.size()) throw std::invalid_argument("permutation_test: samples must have equal size");
  if (test_p.dim() != test_q.dim()) throw std::invalid_argument("permutation_test: samples differ in dimension");
  // Features are computed once for the pooled set and reused by every permutation.
  const SampleSet pooled = SampleSet::concat(test_p, test_q);
  return permutation_test_from_gram(gram_symmetric(spec, pooled.points()), test_p.size(), options);
}

C2stStatistics c2st_statistics(const NetParams& net, const ClassifierHead& head, const SampleSet& test_p,
                               const SampleSet& test_q) {
  if (test_p.size() != test_q.size()) throw std::invalid_argument("c2st_statistics: samples must have equal size");
  if (test_p.empty()) throw std::invalid_argument("c2st_statistics: empty samples");
  const Vector fx = score(net, head, test_p.points());
  const Vector fy = score(net, head, test_q.points());
  const auto correct = (fx.array() > 0.0).count() + (fy.array() <= 0.0).count();
  C2stStatistics out;
  out.accuracy = static_cast<double>(correct) / static_cast<double>(2 * test_p.size());
  out.mean_score_diff = std::abs(fx.mean() - fy.mean());
  return out;
}

}  // namespace learnmmd

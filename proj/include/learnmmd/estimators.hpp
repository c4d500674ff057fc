#pragma once

#include <cstdint>
#include <functional>

#include "learnmmd/kernels.hpp"

namespace learnmmd {

inline constexpr double kDefaultLambda = 1e-8;

// Regularization schedule lambda = n^(-1/3) used by the convergence analysis.
double theoretical_lambda(Index n);

struct PowerCriterion {
  double mmd2_hat = 0.0;    // unbiased MMD^2 estimate
  double sigma2_hat = 0.0;  // regularized variance estimate, includes + lambda
  double j_hat = 0.0;       // mmd2_hat / sqrt(sigma2_hat)
  double lambda = kDefaultLambda;
};

// (1 / (n (n - 1))) sum_{i != j} H_ij. Requires n >= 2.
double mmd2_u(const HMatrix& h);
// (1 / n^2) sum_ij H_ij.
double mmd2_b(const HMatrix& h);
// (4 / n^3) sum_i (sum_j H_ij)^2 - (4 / n^4) (sum_ij H_ij)^2 + lambda, diagonal included.
// lambda = 0 gives the unregularized V-statistic.
double variance_hat(const HMatrix& h, double lambda);
PowerCriterion j_hat(const HMatrix& h, double lambda = kDefaultLambda);

// Draws `count` i.i.d. points (rows) from a fixed distribution.
using Sampler = std::function<Matrix(Index count, Rng& rng)>;

// Monte-Carlo estimates of the population quantities behind the variance of
// the unbiased estimator: E[H_12], xi_1 = E[H_12 H_13] - E[H_12]^2 and
// xi_2 = E[H_12^2] - E[H_12]^2, from n_mc independent triples.
struct PopulationMoments {
  double mmd2 = 0.0, mmd2_se = 0.0;
  double xi1 = 0.0, xi1_se = 0.0;
  double xi2 = 0.0, xi2_se = 0.0;
  Index n_mc = 0;

  // Var[mmd2_u] at sample size n.
  double estimator_variance(Index n) const;
};

PopulationMoments population_oracle(const Sampler& sample_p, const Sampler& sample_q, const KernelSpec& spec,
                                    Index n_mc, std::uint64_t seed);

// Regularized upper tail of chi^2 with `dof` degrees of freedom.
double chi2_upper_tail(double statistic, int dof);

struct MeResult {
  double statistic = 0.0;  // n zbar^T S^-1 zbar
  double p_value = 1.0;
};

inline constexpr double kMeRegularization = 1e-8;

// Mean-embedding statistic with locations as rows of `locations`.
MeResult me_statistic(const KernelSpec& spec, const SampleSet& x, const SampleSet& y, const Matrix& locations);

struct LocationChoice {
  Index index = 0;
  Vector location;
  double statistic = 0.0;
};

// argmax over candidate rows of the single-location statistic on (X, Y);
// ties go to the lowest candidate index.
LocationChoice select_location_from_data(const KernelSpec& spec, const SampleSet& x_train, const SampleSet& y_train,
                                         const Matrix& candidates);

}  // namespace learnmmd

#pragma once

#include <string>
#include <vector>

#include "learnmmd/estimators.hpp"
#include "learnmmd/kernels.hpp"

namespace learnmmd {

struct MklProblem {
  std::vector<HMatrix> h_stack;  // one H matrix per base kernel
  Vector b;                      // b_l = mmd2_u(H_l)
  Matrix a;                      // omega^T A omega = variance_hat(sum_l omega_l H_l, 0)
  double lambda = kDefaultLambda;
  double total = 1.0;  // the solution is scaled to sum to this value

  Index kernels() const { return b.size(); }
};

MklProblem build_mkl_problem(const std::vector<KernelSpec>& bases, const SampleSet& x, const SampleSet& y,
                             double lambda = kDefaultLambda, double total = 1.0);
// Same quantities from precomputed H matrices.
MklProblem mkl_problem_from_h(std::vector<HMatrix> h_stack, double lambda = kDefaultLambda, double total = 1.0);

struct MklSolution {
  Vector weights;       // scaled to sum to problem.total
  Vector direction;     // minimizer of w^T (A + lambda I) w subject to w >= 0, b^T w = 1
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

class MklInfeasibleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kMklTolerance = 1e-8;
inline constexpr int kMklMaxIterations = 100000;

// Throws MklInfeasibleError when no entry of b is positive.
MklSolution solve_mkl(const MklProblem& problem);

// J of the combined kernel with the given weights.
PowerCriterion mkl_criterion(const MklProblem& problem, const Vector& weights, double lambda);
HMatrix combine_h(const MklProblem& problem, const Vector& weights);

// Projection of v onto {w >= 0, b^T w = 1}.
Vector project_feasible(const Vector& v, const Vector& b);

}  // namespace learnmmd

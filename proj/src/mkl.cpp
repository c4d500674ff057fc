#include "learnmmd/mkl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace learnmmd {

MklProblem mkl_problem_from_h(std::vector<HMatrix> h_stack, double lambda, double total) {
  if (h_stack.empty()) throw std::invalid_argument("mkl: need at least one base kernel");
  if (!(lambda >= 0.0)) throw std::invalid_argument("mkl: lambda must be nonnegative");
  if (!(total > 0.0)) throw std::invalid_argument("mkl: total weight must be positive");
  const Index n = h_stack.front().n();
  if (n < 2) throw std::invalid_argument("mkl: need at least two points per sample");
  const Index count = static_cast<Index>(h_stack.size());
  MklProblem problem;
  problem.lambda = lambda;
  problem.total = total;
  problem.b.resize(count);
  Matrix row_means(n, count);
  for (Index l = 0; l < count; ++l) {
    const HMatrix& h = h_stack[static_cast<std::size_t>(l)];
    if (h.n() != n) throw std::invalid_argument("mkl: H matrices differ in size");
    problem.b(l) = mmd2_u(h);
    row_means.col(l) = h.entries.rowwise().sum() / static_cast<double>(n);
  }
  // Centered form of (4/n^3) sum_i r_i r_i^T - (4/n^4) s s^T.
  const Matrix centered = row_means.rowwise() - row_means.colwise().mean();
  problem.a = 4.0 * (centered.transpose() * centered) / static_cast<double>(n);
  problem.h_stack = std::move(h_stack);
  return problem;
}

MklProblem build_mkl_problem(const std::vector<KernelSpec>& bases, const SampleSet& x, const SampleSet& y,
                             double lambda, double total) {
  if (bases.empty()) throw std::invalid_argument("mkl: need at least one base kernel");
  if (x.size() != y.size()) throw std::invalid_argument("mkl: samples must have equal size");
  std::vector<HMatrix> stack;
  stack.reserve(bases.size());
  for (const auto& base : bases) stack.push_back(build_h_matrix(base, x, y));
  return mkl_problem_from_h(std::move(stack), lambda, total);
}

HMatrix combine_h(const MklProblem& problem, const Vector& weights) {
  if (weights.size() != problem.kernels()) throw std::invalid_argument("mkl: weight count mismatch");
  HMatrix out{Matrix::Zero(problem.h_stack.front().n(), problem.h_stack.front().n())};
  for (Index l = 0; l < weights.size(); ++l) out.entries += weights(l) * problem.h_stack[static_cast<std::size_t>(l)].entries;
  return out;
}

PowerCriterion mkl_criterion(const MklProblem& problem, const Vector& weights, double lambda) {
  return j_hat(combine_h(problem, weights), lambda);
}

Vector project_feasible(const Vector& v, const Vector& b) {
  if ((b.array() > 0.0).count() == 0) throw MklInfeasibleError("mkl: infeasible direction (no positive entry of b)");
  auto constraint = [&](double tau) { return b.dot((v - tau * b).cwiseMax(0.0)); };
  // constraint(tau) is nonincreasing; bracket the root of constraint(tau) = 1.
  double lo = -1.0, hi = 1.0;
  while (constraint(lo) < 1.0) lo *= 2.0;
  while (constraint(hi) > 1.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (constraint(mid) > 1.0 ? lo : hi) = mid;
  }
  // Exact solve on the support found by bisection.
  double tau = 0.5 * (lo + hi);
  const Vector active = ((v - tau * b).array() > 0.0 && b.array() != 0.0).cast<double>();
  const double denom = active.dot(b.cwiseProduct(b));
  if (denom > 0.0) {
    const double exact = (active.dot(b.cwiseProduct(v)) - 1.0) / denom;
    const Vector w = (v - exact * b).cwiseMax(0.0);
    if (std::abs(b.dot(w) - 1.0) <= std::abs(constraint(tau) - 1.0)) return w;
  }
  return (v - tau * b).cwiseMax(0.0);
}

namespace {

double residual(const Matrix& m, const Vector& w, const Vector& b, double step) {
  const Vector grad = 2.0 * m * w;
  const Vector moved = project_feasible(w - step * grad, b);
  return (w - moved).lpNorm<Eigen::Infinity>() / std::max(1.0, w.lpNorm<Eigen::Infinity>());
}

// Equality-constrained minimizer restricted to `support`; empty when it leaves the orthant.
std::optional<Vector> polish(const Matrix& m, const Vector& b, const std::vector<Index>& support) {
  const Index k = static_cast<Index>(support.size());
  if (k == 0) return std::nullopt;
  Matrix ms(k, k);
  Vector bs(k);
  for (Index i = 0; i < k; ++i) {
    bs(i) = b(support[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < k; ++j) ms(i, j) = m(support[static_cast<std::size_t>(i)], support[static_cast<std::size_t>(j)]);
  }
  const Eigen::LDLT<Matrix> ldlt(ms);
  if (ldlt.info() != Eigen::Success) return std::nullopt;
  const Vector u = ldlt.solve(bs);
  const double scale = bs.dot(u);
  if (!(scale > 0.0) || !u.allFinite()) return std::nullopt;
  Vector w = Vector::Zero(b.size());
  for (Index i = 0; i < k; ++i) {
    const double value = u(i) / scale;
    if (value < 0.0) return std::nullopt;
    w(support[static_cast<std::size_t>(i)]) = value;
  }
  return w;
}

}  // namespace

MklSolution solve_mkl(const MklProblem& problem) {
  const Vector& b = problem.b;
  const Index count = problem.kernels();
  if ((b.array() > 0.0).count() == 0) throw MklInfeasibleError("mkl: infeasible direction (no positive entry of b)");
  const Matrix m = problem.a + problem.lambda * Matrix::Identity(count, count);
  const double lipschitz =
      std::max(2.0 * Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff(), 1e-300);
  const double step = 1.0 / lipschitz;
  auto objective = [&](const Vector& w) { return w.dot(m * w); };

  // Start from the best single kernel.
  Vector w = Vector::Zero(count);
  {
    double best = std::numeric_limits<double>::infinity();
    for (Index l = 0; l < count; ++l) {
      if (b(l) <= 0.0) continue;
      const double value = m(l, l) / (b(l) * b(l));
      if (value < best) {
        best = value;
        w.setZero();
        w(l) = 1.0 / b(l);
      }
    }
  }

  MklSolution sol;
  double res = residual(m, w, b, step);
  int it = 0;
  while (res >= kMklTolerance && it < kMklMaxIterations) {
    // Projected gradient step with Armijo backtracking.
    const Vector grad = 2.0 * m * w;
    const double f0 = objective(w);
    double t = step;
    Vector next;
    for (int back = 0; back < 60; ++back) {
      next = project_feasible(w - t * grad, b);
      if (objective(next) <= f0 + grad.dot(next - w) + (next - w).squaredNorm() / (2.0 * t)) break;
      t *= 0.5;
    }
    w = next;
    ++it;
    if (it % 20 == 0 || it < 5) {
      std::vector<Index> support;
      for (Index l = 0; l < count; ++l)
        if (w(l) > 0.0) support.push_back(l);
      if (auto polished = polish(m, b, support)) {
        const double r = residual(m, *polished, b, step);
        if (objective(*polished) <= objective(w) + 1e-15 * std::abs(objective(w)) || r < kMklTolerance) {
          w = *polished;
        }
      }
    }
    res = residual(m, w, b, step);
  }
  sol.direction = w;
  sol.objective = objective(w);
  sol.kkt_residual = res;
  sol.iterations = it;
  sol.converged = res < kMklTolerance;
  sol.weights = problem.total * w / w.sum();
  return sol;
}

}  // namespace learnmmd

#include "learnmmd/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace learnmmd {

double theoretical_lambda(Index n) { return std::pow(static_cast<double>(n), -1.0 / 3.0); }

double mmd2_u(const HMatrix& h) {
  const Index n = h.n();
  if (n < 2) throw std::invalid_argument("mmd2_u requires n >= 2");
  const double off_diagonal = h.entries.sum() - h.entries.trace();
  return off_diagonal / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double mmd2_b(const HMatrix& h) {
  const Index n = h.n();
  if (n < 1) throw std::invalid_argument("mmd2_b requires n >= 1");
  return h.entries.sum() / (static_cast<double>(n) * static_cast<double>(n));
}

double variance_hat(const HMatrix& h, double lambda) {
  const Index n = h.n();
  if (n < 1) throw std::invalid_argument("variance_hat requires n >= 1");
  if (!(lambda >= 0.0)) throw std::invalid_argument("variance_hat: lambda must be nonnegative");
  const double nd = static_cast<double>(n);
  // 4 * (mean_i (r_i / n)^2 - (mean_i r_i / n)^2), written in centered form so
  // the result cannot drop below lambda through cancellation.
  const Vector row_means = h.entries.rowwise().sum() / nd;
  const double grand = row_means.mean();
  return 4.0 * (row_means.array() - grand).square().sum() / nd + lambda;
}

PowerCriterion j_hat(const HMatrix& h, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("j_hat: lambda must be positive");
  PowerCriterion pc;
  pc.lambda = lambda;
  pc.mmd2_hat = mmd2_u(h);
  pc.sigma2_hat = variance_hat(h, lambda);
  pc.j_hat = pc.mmd2_hat / std::sqrt(pc.sigma2_hat);
  return pc;
}

double PopulationMoments::estimator_variance(Index n) const {
  const double nd = static_cast<double>(n);
  return 4.0 * (nd - 2.0) / (nd * (nd - 1.0)) * xi1 + 2.0 / (nd * (nd - 1.0)) * xi2;
}

namespace {

// h(U_a, U_b) = k(X_a, X_b) + k(Y_a, Y_b) - k(X_a, Y_b) - k(X_b, Y_a), row-wise.
Vector h_pairs(const KernelSpec& spec, const Matrix& xa, const Matrix& ya, const Matrix& xb, const Matrix& yb) {
  return kernel_pairs(spec, xa, xb) + kernel_pairs(spec, ya, yb) - kernel_pairs(spec, xa, yb) -
         kernel_pairs(spec, xb, ya);
}

double sample_sd(const Vector& v) {
  const double m = v.mean();
  return std::sqrt((v.array() - m).square().sum() / static_cast<double>(v.size() - 1));
}

}  // namespace

PopulationMoments population_oracle(const Sampler& sample_p, const Sampler& sample_q, const KernelSpec& spec,
                                    Index n_mc, std::uint64_t seed) {
  if (n_mc < 2) throw std::invalid_argument("population_oracle: n_mc must be >= 2");
  Rng rng(seed);
  Vector h12(n_mc), h13(n_mc), h23(n_mc);
  constexpr Index kChunk = 50000;
  for (Index start = 0; start < n_mc; start += kChunk) {
    const Index m = std::min(kChunk, n_mc - start);
    Matrix x[3], y[3];
    for (int t = 0; t < 3; ++t) {
      x[t] = sample_p(m, rng);
      y[t] = sample_q(m, rng);
    }
    h12.segment(start, m) = h_pairs(spec, x[0], y[0], x[1], y[1]);
    h13.segment(start, m) = h_pairs(spec, x[0], y[0], x[2], y[2]);
    h23.segment(start, m) = h_pairs(spec, x[1], y[1], x[2], y[2]);
  }
  const double root_n = std::sqrt(static_cast<double>(n_mc));
  PopulationMoments out;
  out.n_mc = n_mc;

  const Vector triple_mean = (h12 + h13 + h23) / 3.0;
  out.mmd2 = triple_mean.mean();
  out.mmd2_se = sample_sd(triple_mean) / root_n;

  const double m12 = h12.mean();
  const double m13 = h13.mean();
  const Vector cross = h12.cwiseProduct(h13);
  out.xi1 = cross.mean() - m12 * m13;
  out.xi1_se = sample_sd(cross - m13 * h12 - m12 * h13) / root_n;

  const Vector sq = h12.cwiseProduct(h12);
  out.xi2 = sq.mean() - m12 * m12;
  out.xi2_se = sample_sd(sq - 2.0 * m12 * h12) / root_n;
  return out;
}

double chi2_upper_tail(double statistic, int dof) {
  if (dof < 1) throw std::invalid_argument("chi2_upper_tail: dof must be >= 1");
  if (!(statistic > 0.0)) return 1.0;
  if (std::isinf(statistic)) return 0.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
}

namespace {

MeResult me_from_features(const Matrix& z) {
  const Index n = z.rows();
  const Index l = z.cols();
  const Vector zbar = z.colwise().mean().transpose();
  if (zbar.cwiseAbs().maxCoeff() == 0.0) return {0.0, 1.0};
  const Matrix centered = z.rowwise() - zbar.transpose();
  Matrix s = centered.transpose() * centered / static_cast<double>(n - 1);
  s.diagonal().array() += kMeRegularization;
  const Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) throw std::runtime_error("me_statistic: covariance is singular after regularization");
  const double stat = static_cast<double>(n) * zbar.dot(llt.solve(zbar));
  if (!std::isfinite(stat)) throw std::runtime_error("me_statistic: covariance is singular after regularization");
  return {stat, chi2_upper_tail(stat, static_cast<int>(l))};
}

}  // namespace

MeResult me_statistic(const KernelSpec& spec, const SampleSet& x, const SampleSet& y, const Matrix& locations) {
  if (x.size() != y.size()) throw std::invalid_argument("me_statistic: X and Y must have the same size");
  if (locations.rows() < 1) throw std::invalid_argument("me_statistic: need at least one location");
  if (x.size() <= locations.rows()) throw std::invalid_argument("me_statistic: need more points than locations");
  const Matrix z = gram_block(spec, x.points(), locations) - gram_block(spec, y.points(), locations);
  return me_from_features(z);
}

LocationChoice select_location_from_data(const KernelSpec& spec, const SampleSet& x_train, const SampleSet& y_train,
                                         const Matrix& candidates) {
  if (candidates.rows() < 1) throw std::invalid_argument("select_location_from_data: no candidates");
  if (x_train.size() != y_train.size()) throw std::invalid_argument("select_location_from_data: size mismatch");
  if (x_train.size() < 2) throw std::invalid_argument("select_location_from_data: need at least two points");
  const Matrix z_all = gram_block(spec, x_train.points(), candidates) - gram_block(spec, y_train.points(), candidates);
  LocationChoice best;
  best.statistic = -1.0;
  for (Index c = 0; c < candidates.rows(); ++c) {
    const MeResult r = me_from_features(z_all.col(c));
    if (r.statistic > best.statistic) {
      best.index = c;
      best.statistic = r.statistic;
    }
  }
  best.location = candidates.row(best.index).transpose();
  return best;
}

}  // namespace learnmmd

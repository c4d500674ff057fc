#include "learnmmd/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace learnmmd {

SampleSet::SampleSet(Matrix points) : points_(std::move(points)) {
  if (points_.cols() < 1) throw std::invalid_argument("SampleSet: dimension must be at least 1");
}

SampleSet SampleSet::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("SampleSet: no rows");
  const std::size_t d = rows.front().size();
  Matrix points(static_cast<Index>(rows.size()), static_cast<Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) throw std::invalid_argument("SampleSet: rows differ in dimension");
    for (std::size_t j = 0; j < d; ++j) points(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return SampleSet(std::move(points));
}

SampleSet SampleSet::concat(const SampleSet& a, const SampleSet& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("SampleSet::concat: dimension mismatch");
  Matrix points(a.size() + b.size(), a.dim());
  points << a.points(), b.points();
  return SampleSet(std::move(points));
}

SampleSet SampleSet::subset(const std::vector<std::size_t>& indices) const {
  Matrix points(static_cast<Index>(indices.size()), dim());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    points.row(static_cast<Index>(i)) = points_.row(static_cast<Index>(indices[i]));
  }
  return SampleSet(std::move(points));
}

SampleSet SampleSet::head(Index count) const { return SampleSet(Matrix(points_.topRows(count))); }

bool operator==(const SampleSet& a, const SampleSet& b) {
  return a.size() == b.size() && a.dim() == b.dim() && a.points_ == b.points_;
}

bool operator==(const GaussianMixture& a, const GaussianMixture& b) {
  if (a.components() != b.components()) return false;
  for (std::size_t i = 0; i < a.components(); ++i) {
    if (a.means[i].size() != b.means[i].size() || a.means[i] != b.means[i]) return false;
    if (a.covariances[i].rows() != b.covariances[i].rows() || a.covariances[i] != b.covariances[i]) return false;
  }
  return true;
}

double blob_delta(int mode) {
  if (mode < 1 || mode > 9) throw std::out_of_range("blob_delta: mode must be in 1..9");
  if (mode < 5) return -0.02 - 0.002 * (mode - 1);
  if (mode == 5) return 0.0;
  return 0.02 + 0.002 * (mode - 6);
}

std::pair<GaussianMixture, GaussianMixture> blob_mixtures(DatasetVariant variant, double delta_scale) {
  GaussianMixture p, q;
  for (int i = 1; i <= 9; ++i) {
    Vector mean(2);
    mean << static_cast<double>((i - 1) / 3), static_cast<double>((i - 1) % 3);
    Matrix cov = 0.03 * Matrix::Identity(2, 2);
    p.means.push_back(mean);
    p.covariances.push_back(cov);
    if (variant == DatasetVariant::Different) {
      cov(0, 1) = cov(1, 0) = delta_scale * blob_delta(i);
    }
    q.means.push_back(mean);
    q.covariances.push_back(cov);
  }
  return {std::move(p), std::move(q)};
}

std::pair<GaussianMixture, GaussianMixture> hdgm_mixtures(DatasetVariant variant, int d) {
  if (d < 2) throw std::invalid_argument("HDGM requires dimension d >= 2");
  GaussianMixture p, q;
  const double deltas[2] = {0.5, -0.5};
  for (int c = 0; c < 2; ++c) {
    Vector mean = Vector::Constant(d, c == 0 ? 0.0 : 0.5);
    Matrix cov = Matrix::Identity(d, d);
    p.means.push_back(mean);
    p.covariances.push_back(cov);
    if (variant == DatasetVariant::Different) cov(0, 1) = cov(1, 0) = deltas[c];
    q.means.push_back(mean);
    q.covariances.push_back(cov);
  }
  return {std::move(p), std::move(q)};
}

namespace {

std::vector<Matrix> cholesky_factors(const GaussianMixture& mixture) {
  std::vector<Matrix> factors;
  factors.reserve(mixture.components());
  for (const auto& cov : mixture.covariances) {
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("mixture covariance is not positive definite");
    factors.push_back(llt.matrixL());
  }
  return factors;
}

void draw_component(const GaussianMixture& mixture, const std::vector<Matrix>& factors, std::size_t component,
                    Rng& rng, std::normal_distribution<double>& normal, Matrix& out, Index row) {
  const Index d = mixture.dim();
  Vector z(d);
  for (Index k = 0; k < d; ++k) z(k) = normal(rng);
  out.row(row) = (mixture.means[component] + factors[component] * z).transpose();
}

}  // namespace

SampleSet sample_mixture(const GaussianMixture& mixture, Index n, Rng& rng) {
  if (mixture.components() == 0) throw std::invalid_argument("sample_mixture: empty mixture");
  const auto factors = cholesky_factors(mixture);
  std::uniform_int_distribution<std::size_t> pick(0, mixture.components() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix points(n, mixture.dim());
  for (Index i = 0; i < n; ++i) draw_component(mixture, factors, pick(rng), rng, normal, points, i);
  return SampleSet(std::move(points));
}

SampleSet sample_mixture_exact(const GaussianMixture& mixture, Index n_per_component, Rng& rng) {
  if (mixture.components() == 0) throw std::invalid_argument("sample_mixture_exact: empty mixture");
  const auto factors = cholesky_factors(mixture);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index n = n_per_component * static_cast<Index>(mixture.components());
  Matrix points(n, mixture.dim());
  Index row = 0;
  for (std::size_t c = 0; c < mixture.components(); ++c) {
    for (Index i = 0; i < n_per_component; ++i) draw_component(mixture, factors, c, rng, normal, points, row++);
  }
  const auto order = random_permutation(static_cast<std::size_t>(n), rng);
  return SampleSet(std::move(points)).subset(order);
}

std::pair<SampleSet, SampleSet> generate_blob(const BlobSpec& spec) {
  if (spec.n_per_mode < 1) throw std::invalid_argument("generate_blob: n_per_mode must be >= 1");
  const auto [p_mix, q_mix] = blob_mixtures(spec.variant, spec.delta_scale);
  Rng rng_p(derive_seed(spec.seed, 0));
  Rng rng_q(derive_seed(spec.seed, 1));
  if (spec.assignment == ModeAssignment::ExactPerMode) {
    return {sample_mixture_exact(p_mix, spec.n_per_mode, rng_p), sample_mixture_exact(q_mix, spec.n_per_mode, rng_q)};
  }
  const Index n = 9 * static_cast<Index>(spec.n_per_mode);
  return {sample_mixture(p_mix, n, rng_p), sample_mixture(q_mix, n, rng_q)};
}

std::pair<SampleSet, SampleSet> generate_hdgm(const HdgmSpec& spec) {
  if (spec.d < 2) throw std::invalid_argument("generate_hdgm: dimension must be >= 2");
  if (spec.n_total < 2) throw std::invalid_argument("generate_hdgm: n_total must be >= 2");
  const auto [p_mix, q_mix] = hdgm_mixtures(spec.variant, spec.d);
  Rng rng_p(derive_seed(spec.seed, 0));
  Rng rng_q(derive_seed(spec.seed, 1));
  return {sample_mixture(p_mix, spec.n_total, rng_p), sample_mixture(q_mix, spec.n_total, rng_q)};
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

SampleSet parse_csv(const std::string& text, char delimiter, bool skip_header) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_header && line_no == 1) continue;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    std::size_t column = 0;
    while (true) {
      const std::size_t stop = view.find(delimiter, start);
      const std::string_view field = trim(view.substr(start, stop == std::string_view::npos ? view.npos : stop - start));
      ++column;
      double value = 0.0;
      const char* first = field.data();
      const char* last = field.data() + field.size();
      if (!field.empty() && *first == '+') ++first;
      const auto result = std::from_chars(first, last, value);
      if (field.empty() || result.ec != std::errc() || result.ptr != last) {
        throw ParseError(ParseError::Kind::NonNumeric, line_no,
                         "line " + std::to_string(line_no) + ", column " + std::to_string(column) +
                             ": non-numeric field '" + std::string(field) + "'");
      }
      row.push_back(value);
      if (stop == std::string_view::npos) break;
      start = stop + 1;
    }
    if (rows.empty()) {
      width = row.size();
    } else if (row.size() != width) {
      throw ParseError(ParseError::Kind::RaggedRow, line_no,
                       "line " + std::to_string(line_no) + ": expected " + std::to_string(width) + " columns, found " +
                           std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(ParseError::Kind::EmptyInput, 0, "empty input");
  return SampleSet::from_rows(rows);
}

SampleSet load_csv(const std::filesystem::path& path, char delimiter, bool skip_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(ParseError::Kind::Io, 0, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), delimiter, skip_header);
}

std::string format_csv(const SampleSet& samples, char delimiter) {
  std::string out;
  char buf[32];
  for (Index i = 0; i < samples.size(); ++i) {
    for (Index j = 0; j < samples.dim(); ++j) {
      if (j > 0) out.push_back(delimiter);
      const int len = std::snprintf(buf, sizeof buf, "%.17g", samples.points()(i, j));
      out.append(buf, static_cast<std::size_t>(len));
    }
    out.push_back('\n');
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const SampleSet& samples, char delimiter) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << format_csv(samples, delimiter);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Splitting

SplitPair split_with_size(const SampleSet& p, const SampleSet& q, Index n_train, std::uint64_t seed) {
  if (p.size() != q.size()) throw std::invalid_argument("split: P and Q sample sets differ in size");
  if (p.dim() != q.dim()) throw std::invalid_argument("split: P and Q sample sets differ in dimension");
  const Index n = p.size();
  if (n_train < 1 || n_train >= n) throw std::invalid_argument("split: training size must be in [1, n-1]");
  Rng rng(seed);
  auto perm_p = random_permutation(static_cast<std::size_t>(n), rng);
  auto perm_q = random_permutation(static_cast<std::size_t>(n), rng);
  const auto cut = static_cast<std::ptrdiff_t>(n_train);
  SplitPair out;
  out.train_index_p.assign(perm_p.begin(), perm_p.begin() + cut);
  out.test_index_p.assign(perm_p.begin() + cut, perm_p.end());
  out.train_index_q.assign(perm_q.begin(), perm_q.begin() + cut);
  out.test_index_q.assign(perm_q.begin() + cut, perm_q.end());
  out.train_p = p.subset(out.train_index_p);
  out.test_p = p.subset(out.test_index_p);
  out.train_q = q.subset(out.train_index_q);
  out.test_q = q.subset(out.test_index_q);
  return out;
}

SplitPair split(const SampleSet& p, const SampleSet& q, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw std::invalid_argument("split: train_fraction must be in (0, 1)");
  if (p.size() != q.size()) throw std::invalid_argument("split: P and Q sample sets differ in size");
  const Index n = p.size();
  if (n < 2) throw std::invalid_argument("split: need at least two points per sample");
  const Index n_train = std::clamp<Index>(std::llround(train_fraction * static_cast<double>(n)), 1, n - 1);
  return split_with_size(p, q, n_train, seed);
}

Index suggest_train_size(Index n_total, double c) {
  if (n_total < 4) throw std::invalid_argument("suggest_train_size: N must be >= 4");
  if (!(c > 0.0)) throw std::invalid_argument("suggest_train_size: c must be positive");
  const double n = static_cast<double>(n_total);
  const double raw = std::pow(c * n * std::sqrt(std::log(n)), 0.75);
  return std::clamp<Index>(std::llround(raw), 1, n_total - 1);
}

}  // namespace learnmmd

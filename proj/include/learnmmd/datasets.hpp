#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "learnmmd/random.hpp"

namespace learnmmd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// An ordered collection of d-dimensional points, one per row.
class SampleSet {
 public:
  SampleSet() = default;
  explicit SampleSet(Matrix points);

  static SampleSet from_rows(const std::vector<std::vector<double>>& rows);
  static SampleSet concat(const SampleSet& a, const SampleSet& b);

  Index size() const { return points_.rows(); }
  Index dim() const { return points_.cols(); }
  bool empty() const { return points_.rows() == 0; }

  const Matrix& points() const { return points_; }
  Vector point(Index i) const { return points_.row(i).transpose(); }

  SampleSet subset(const std::vector<std::size_t>& indices) const;
  SampleSet head(Index count) const;

  friend bool operator==(const SampleSet& a, const SampleSet& b);

 private:
  Matrix points_;
};

enum class DatasetVariant { Same, Different };

// How mixture components are assigned to generated points.
enum class ModeAssignment {
  ExactPerMode,  // every component receives the same number of points
  Multinomial,   // component drawn uniformly at random per point
};

struct GaussianMixture {
  std::vector<Vector> means;
  std::vector<Matrix> covariances;

  Index dim() const { return means.empty() ? 0 : means.front().size(); }
  std::size_t components() const { return means.size(); }
  friend bool operator==(const GaussianMixture& a, const GaussianMixture& b);
};

struct BlobSpec {
  DatasetVariant variant = DatasetVariant::Different;
  int n_per_mode = 40;
  std::uint64_t seed = 0;
  ModeAssignment assignment = ModeAssignment::Multinomial;
  // Multiplies every off-diagonal perturbation of the Q components.
  double delta_scale = 1.0;
};

struct HdgmSpec {
  DatasetVariant variant = DatasetVariant::Different;
  int d = 10;
  int n_total = 4000;
  std::uint64_t seed = 0;
};

// Mixture descriptors (P, Q) behind the generators.
std::pair<GaussianMixture, GaussianMixture> blob_mixtures(DatasetVariant variant, double delta_scale = 1.0);
std::pair<GaussianMixture, GaussianMixture> hdgm_mixtures(DatasetVariant variant, int d);

// Off-diagonal covariance entry of Q's i-th blob (i is 1-based, 1..9).
double blob_delta(int mode);

// i.i.d. draws with uniformly chosen components.
SampleSet sample_mixture(const GaussianMixture& mixture, Index n, Rng& rng);
// Exactly n_per_component draws per component, returned in shuffled order.
SampleSet sample_mixture_exact(const GaussianMixture& mixture, Index n_per_component, Rng& rng);

std::pair<SampleSet, SampleSet> generate_blob(const BlobSpec& spec);
std::pair<SampleSet, SampleSet> generate_hdgm(const HdgmSpec& spec);

class ParseError : public std::runtime_error {
 public:
  enum class Kind { Io, EmptyInput, RaggedRow, NonNumeric };
  ParseError(Kind kind, std::size_t line, const std::string& message)
      : std::runtime_error(message), kind_(kind), line_(line) {}
  Kind kind() const { return kind_; }
  // 1-based line number of the offending row; 0 when not applicable.
  std::size_t line() const { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

SampleSet load_csv(const std::filesystem::path& path, char delimiter = ',', bool skip_header = false);
SampleSet parse_csv(const std::string& text, char delimiter = ',', bool skip_header = false);
// Full-precision decimal so that load_csv reproduces the values exactly.
void write_csv(const std::filesystem::path& path, const SampleSet& samples, char delimiter = ',');
std::string format_csv(const SampleSet& samples, char delimiter = ',');

struct SplitPair {
  SampleSet train_p, train_q, test_p, test_q;
  std::vector<std::size_t> train_index_p, test_index_p, train_index_q, test_index_q;
};

SplitPair split(const SampleSet& p, const SampleSet& q, double train_fraction, std::uint64_t seed);
SplitPair split_with_size(const SampleSet& p, const SampleSet& q, Index n_train, std::uint64_t seed);

// clamp(round((c * N * sqrt(log N))^(3/4)), 1, N - 1)
Index suggest_train_size(Index n_total, double c = 1.0);

}  // namespace learnmmd

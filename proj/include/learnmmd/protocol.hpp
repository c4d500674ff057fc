#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "learnmmd/datasets.hpp"
#include "learnmmd/mkl.hpp"
#include "learnmmd/permtest.hpp"
#include "learnmmd/trainer.hpp"

namespace learnmmd {

enum class MethodKind { MmdD, MmdO, C2stS, C2stL, Mkl, MeFixed, Custom };

std::string to_string(MethodKind kind);
// Accepts mmd-d, mmd-o, c2st-s, c2st-l, mkl, me-fixed and ablation codes such
// as "D+J" or "G+C" (variant + objective).
MethodKind parse_method_kind(const std::string& text);

enum class DatasetKind { Blob, Hdgm, Csv };

std::string to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(const std::string& text);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::Blob;
  BlobSpec blob;
  HdgmSpec hdgm;
  // Csv: one file per distribution.
  std::filesystem::path csv_p, csv_q;
  char delimiter = ',';
  bool header = false;
  double train_fraction = 0.5;
  Index eval_size = 0;  // Csv: points per side in each evaluation set; 0 = whole test split

  Index dim() const;
  std::string name() const;
};

struct MethodSpec {
  std::string name = "mmd-d";
  MethodKind kind = MethodKind::MmdD;
  TrainConfig train;
  // MKL: Gaussian bases at these multiples of the median distance.
  std::vector<double> mkl_multipliers = {0.25, 0.5, 1.0, 2.0, 4.0};
  // ME: number of training points offered as candidate locations.
  int me_candidates = 200;
};

// Hyperparameters used when a method is not configured further.
MethodSpec default_method(MethodKind kind, const DatasetSpec& dataset);
// Ablation code "V+O" (for instance "L+C") on top of the dataset defaults.
MethodSpec ablation_method(const std::string& code, const DatasetSpec& dataset);

struct TestSettings {
  int n_perm = kDefaultPermutations;
  double alpha = 0.05;
  int n_eval_sets = 100;
  int n_repeats = 10;
  bool smoothed_pvalue = false;
  int threads = 1;
};

// A kernel (or ME location) fitted on training data.
struct FittedMethod {
  std::string method;
  MethodKind kind = MethodKind::MmdD;
  KernelSpec kernel;
  Matrix me_location;  // one row; ME only
  std::optional<TrainReport> train_report;
  std::optional<MklSolution> mkl_solution;
};

FittedMethod fit_method(const MethodSpec& method, const SampleSet& train_p, const SampleSet& train_q,
                        std::uint64_t seed);

struct TestDecision {
  double statistic = 0.0;
  double p_value = 1.0;
  bool reject = false;
};

TestDecision evaluate_method(const FittedMethod& fitted, const SampleSet& test_p, const SampleSet& test_q,
                             const TestSettings& settings, std::uint64_t seed);

// Training samples for one repeat and the e-th fresh evaluation set.
std::pair<SampleSet, SampleSet> training_data(const DatasetSpec& dataset, int repeat, std::uint64_t seed);
std::pair<SampleSet, SampleSet> evaluation_data(const DatasetSpec& dataset, int repeat, int eval_index,
                                                std::uint64_t seed);

struct ProtocolResult {
  std::vector<double> repeat_rates;  // rejection rate per repeat
  double mean_rate = 0.0;
  double stderr_rate = 0.0;  // sd of repeat rates / sqrt(repeats); 0 for one repeat
  std::vector<FittedMethod> fitted;  // one per repeat
};

ProtocolResult run_protocol(const MethodSpec& method, const DatasetSpec& dataset, const TestSettings& settings,
                            std::uint64_t seed);

struct ReportRow {
  std::string method;
  std::string dataset;
  std::string param;
  int repeat = -1;  // -1 marks the across-repeat aggregate
  double power_or_type1 = 0.0;
  double stderr_value = 0.0;
};

class ExperimentReport {
 public:
  static constexpr const char* kHeader = "method,dataset,param,repeat,power_or_type1,stderr";

  void add(const std::string& method, const std::string& dataset, const std::string& param,
           const ProtocolResult& result);
  const std::vector<ReportRow>& rows() const { return rows_; }
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;

 private:
  std::vector<ReportRow> rows_;
};

}  // namespace learnmmd

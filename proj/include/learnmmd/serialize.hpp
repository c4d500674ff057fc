#pragma once

#include <filesystem>

#include <json.hpp>

#include "learnmmd/deepnet.hpp"
#include "learnmmd/kernels.hpp"
#include "learnmmd/mkl.hpp"
#include "learnmmd/permtest.hpp"
#include "learnmmd/trainer.hpp"

namespace learnmmd {

using Json = nlohmann::json;

// Matrices are stored as {"rows", "cols", "data"} with data in row-major order.
// Doubles are written in shortest round-trip form, so reloading is bit-exact.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

Json net_to_json(const NetParams& net);
NetParams net_from_json(const Json& j);

Json head_to_json(const ClassifierHead& head);
ClassifierHead head_from_json(const Json& j);

Json kernel_to_json(const KernelSpec& spec);
// Throws std::invalid_argument on unknown tags or malformed fields.
KernelSpec kernel_from_json(const Json& j);

Json outcome_to_json(const TestOutcome& outcome);
Json train_report_to_json(const TrainReport& report);
Json mkl_problem_to_json(const MklProblem& problem);  // A, b, lambda, total
Json mkl_solution_to_json(const MklSolution& solution);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace learnmmd

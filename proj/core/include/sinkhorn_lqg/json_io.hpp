#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "sinkhorn_lqg/dr_solver.hpp"
#include "sinkhorn_lqg/simulation.hpp"

// Wire formats. Matrices are row-major nested arrays; non-finite reals are
// written as null.
namespace sinkhorn_lqg::json_io {

using nlohmann::json;

json matrix_to_json(const Matrix& m);
/// Accepts a nested array of equal-length numeric rows. A bare number is read
/// as a 1x1 matrix. Throws kInvalidInput otherwise.
Matrix matrix_from_json(const json& j, const std::string& what);
json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j, const std::string& what);

json real_to_json(double x);

json report_to_json(const FeasibilityReport& r);

json options_to_json(const SolverOptions& o);
/// Missing keys keep their defaults.
SolverOptions options_from_json(const json& j);

json blocks_to_json(const CovarianceBlocks& b);

json solution_to_json(const GameSolution& s, const SolverOptions& o, const std::string& hash);
/// Reads "U" and "q". Throws kInvalidInput on a malformed document.
Policy policy_from_json(const json& j);

json summary_to_json(const CostSummary& s, const std::string& hash);
void write_costs_csv(std::ostream& out, const CostSummary& s);

}  // namespace sinkhorn_lqg::json_io

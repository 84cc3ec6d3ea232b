#include "sinkhorn_lqg/json_io.hpp"

#include <cmath>
#include <charconv>

namespace sinkhorn_lqg::json_io {

namespace {

[[noreturn]] void bad(const std::string& what, const std::string& why) {
  throw Error(ErrorCode::kInvalidInput, what + ": " + why);
}

}  // namespace

json real_to_json(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(real_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& what) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) bad(what, "expected a non-empty nested array");
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) bad(what, "expected rows of numbers");
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) bad(what, "ragged rows");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) bad(what, "non-numeric entry");
      m(static_cast<Index>(r), static_cast<Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(real_to_json(v(i)));
  return out;
}

Vector vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) bad(what, "expected an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) bad(what, "non-numeric entry");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

json report_to_json(const FeasibilityReport& r) {
  json out = {{"feasible", r.feasible},
              {"rho_min_numeric", real_to_json(r.rho_min_numeric)},
              {"rho_min_paper", real_to_json(r.rho_min_closed_form)},
              {"radius", real_to_json(r.radius)}};
  if (!r.message.empty()) out["message"] = r.message;
  return out;
}

json options_to_json(const SolverOptions& o) {
  return {{"max_iters", o.max_iters},         {"tol_gap", o.tol_gap},
          {"lmo_tol", o.lmo_tol},             {"bisection_max", o.bisection_max},
          {"ascent_max", o.ascent_max},       {"seedless", true}};
}

SolverOptions options_from_json(const json& j) {
  SolverOptions o;
  if (j.is_null()) return o;
  if (!j.is_object()) bad("solver", "expected an object");
  try {
    o.max_iters = j.value("max_iters", o.max_iters);
    o.tol_gap = j.value("tol_gap", o.tol_gap);
    o.lmo_tol = j.value("lmo_tol", o.lmo_tol);
    o.bisection_max = j.value("bisection_max", o.bisection_max);
    o.ascent_max = j.value("ascent_max", o.ascent_max);
  } catch (const json::exception& e) {
    bad("solver", e.what());
  }
  if (o.max_iters < 1 || !(o.tol_gap > 0.0) || !(o.lmo_tol > 0.0) || o.bisection_max < 1 ||
      o.ascent_max < 1) {
    bad("solver", "options must be positive");
  }
  return o;
}

json blocks_to_json(const CovarianceBlocks& b) {
  json w = json::array();
  json v = json::array();
  for (const auto& m : b.W) w.push_back(matrix_to_json(m.matrix()));
  for (const auto& m : b.V) v.push_back(matrix_to_json(m.matrix()));
  return {{"X0", matrix_to_json(b.X0.matrix())}, {"W", w}, {"V", v}};
}

json solution_to_json(const GameSolution& s, const SolverOptions& o, const std::string& hash) {
  return {{"U", matrix_to_json(s.policy.U)},
          {"q", vector_to_json(s.policy.q)},
          {"value", real_to_json(s.value)},
          {"nash_gap", real_to_json(s.nash_gap)},
          {"iterations", s.iterations},
          {"worst_case", blocks_to_json(s.worst_case)},
          {"solver", options_to_json(o)},
          {"converged", s.converged},
          {"config_hash", hash}};
}

Policy policy_from_json(const json& j) {
  if (!j.is_object() || !j.contains("U") || !j.contains("q")) {
    bad("policy", "expected an object with \"U\" and \"q\"");
  }
  Policy p;
  p.U = matrix_from_json(j.at("U"), "policy.U");
  p.q = vector_from_json(j.at("q"), "policy.q");
  if (!p.U.allFinite() || !p.q.allFinite()) bad("policy", "non-finite entries");
  return p;
}

json summary_to_json(const CostSummary& s, const std::string& hash) {
  json bins = json::array();
  for (std::size_t b = 0; b < s.histogram.counts.size(); ++b) {
    bins.push_back({s.histogram.edges[b], s.histogram.counts[b]});
  }
  return {{"empirical_mean", real_to_json(s.empirical_mean)},
          {"empirical_std", real_to_json(s.empirical_std)},
          {"theoretical_mean", real_to_json(s.theoretical_mean)},
          {"standard_error", real_to_json(s.standard_error())},
          {"within_band", s.within_band},
          {"n", s.n},
          {"seed", s.seed},
          {"bins", bins},
          {"bin_width", real_to_json(s.histogram.bin_width)},
          {"binning", s.histogram.rule},
          {"config_hash", hash}};
}

void write_costs_csv(std::ostream& out, const CostSummary& s) {
  out << "sample_id,cost\n";
  for (std::size_t i = 0; i < s.per_sample_costs.size(); ++i) {
    // Shortest representation that round-trips exactly.
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, s.per_sample_costs[i]);
    out << i << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\n';
  }
}

}  // namespace sinkhorn_lqg::json_io

#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "sinkhorn_lqg/json_io.hpp"

namespace sinkhorn_lqg::cli {

namespace {

using nlohmann::json;
using json_io::matrix_from_json;
using json_io::matrix_to_json;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::kInvalidInput, what); }

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) bad(where + ": missing \"" + key + "\"");
  return j.at(key);
}

// Nesting depth of the first element chain: 0 number, 1 [x], 2 [[x]], ...
int depth(const json& j) {
  int d = 0;
  const json* p = &j;
  while (p->is_array() && !p->empty()) {
    ++d;
    p = &p->front();
  }
  return d;
}

// One matrix (a number or [[...]]) is repeated; a list ([[[...]]] or a flat
// list of numbers) must have exactly `steps` entries.
std::vector<Matrix> per_step(const json& j, int steps, const std::string& what) {
  const int dep = depth(j);
  if (dep == 0 || dep == 2) return std::vector<Matrix>(static_cast<std::size_t>(steps),
                                                       matrix_from_json(j, what));
  if (dep != 1 && dep != 3) bad(what + ": expected a matrix or a per-step list of matrices");
  if (j.size() != static_cast<std::size_t>(steps)) {
    bad(what + ": per-step list needs " + std::to_string(steps) + " entries, got " +
        std::to_string(j.size()));
  }
  std::vector<Matrix> out;
  for (std::size_t t = 0; t < j.size(); ++t) {
    out.push_back(matrix_from_json(j[t], what + "[" + std::to_string(t) + "]"));
  }
  return out;
}

std::vector<SpdMatrix> per_step_spd(const json& j, int steps, const std::string& what) {
  std::vector<SpdMatrix> out;
  for (const Matrix& m : per_step(j, steps, what)) out.emplace_back(m);
  return out;
}

template <typename M>
json collapse(const std::vector<M>& steps) {
  const auto raw = [](const M& m) -> const Matrix& {
    if constexpr (std::is_same_v<M, SpdMatrix>) return m.matrix(); else return m;
  };
  bool same = true;
  for (const M& m : steps) same = same && raw(m) == raw(steps.front());
  if (same && !steps.empty()) return matrix_to_json(raw(steps.front()));
  json out = json::array();
  for (const M& m : steps) out.push_back(matrix_to_json(raw(m)));
  return out;
}

std::vector<double> per_step_radius(const json& j, int steps, const std::string& what) {
  if (j.is_number()) return std::vector<double>(static_cast<std::size_t>(steps), j.get<double>());
  if (!j.is_array() || j.size() != static_cast<std::size_t>(steps)) {
    bad(what + ": expected a number or a list of " + std::to_string(steps));
  }
  std::vector<double> out;
  for (const json& x : j) {
    if (!x.is_number()) bad(what + ": non-numeric radius");
    out.push_back(x.get<double>());
  }
  return out;
}

json collapse_radius(const std::vector<double>& r) {
  bool same = true;
  for (double x : r) same = same && x == r.front();
  if (same && !r.empty()) return r.front();
  return r;
}

void check_radius(double r, const std::string& what) {
  if (!std::isfinite(r) || r < 0.0) bad(what + " must be a finite non-negative number");
}

void check_epsilon(double eps) {
  if (!std::isfinite(eps) || eps < 0.0) bad("ambiguity.epsilon must be finite and >= 0");
  if (eps > kMaxEpsilon) {
    throw Error(ErrorCode::kInfeasible,
                "ambiguity.epsilon exceeds 1e6; the ambiguity set degenerates");
  }
}

CovarianceBlocks read_blocks(const json& j, int steps, const std::string& where) {
  CovarianceBlocks b;
  b.X0 = SpdMatrix(matrix_from_json(require(j, "X0", where), where + ".X0"));
  b.W = per_step_spd(require(j, "W", where), steps, where + ".W");
  b.V = per_step_spd(require(j, "V", where), steps, where + ".V");
  return b;
}

CovarianceBlocks identity_blocks(const SystemSpec& s) {
  CovarianceBlocks b;
  b.X0 = SpdMatrix::identity(s.state_dim());
  b.W.assign(static_cast<std::size_t>(s.horizon), SpdMatrix::identity(s.state_dim()));
  b.V.assign(static_cast<std::size_t>(s.horizon), SpdMatrix::identity(s.output_dim()));
  return b;
}

void check_block_dims(const CovarianceBlocks& b, const SystemSpec& s, const std::string& where) {
  bool ok = b.X0.dim() == s.state_dim();
  for (const auto& w : b.W) ok = ok && w.dim() == s.state_dim();
  for (const auto& v : b.V) ok = ok && v.dim() == s.output_dim();
  if (!ok) throw Error(ErrorCode::kDimMismatch, where + ": covariance shape does not match "
                                                        "the system");
}

}  // namespace

AmbiguityBlocks RunConfig::ambiguity() const {
  AmbiguityBlocks a;
  a.x0 = AmbiguitySpec{nominal.X0, reference.X0, rho_x0, epsilon};
  for (std::size_t t = 0; t < nominal.W.size(); ++t) {
    a.w.push_back(AmbiguitySpec{nominal.W[t], reference.W[t], rho_w[t], epsilon});
  }
  for (std::size_t t = 0; t < nominal.V.size(); ++t) {
    a.v.push_back(AmbiguitySpec{nominal.V[t], reference.V[t], rho_v[t], epsilon});
  }
  return a;
}

void RunConfig::scale_radii(double factor) {
  rho_x0 *= factor;
  for (double& r : rho_w) r *= factor;
  for (double& r : rho_v) r *= factor;
}

void RunConfig::set_radii(double rho) {
  rho_x0 = rho;
  for (double& r : rho_w) r = rho;
  for (double& r : rho_v) r = rho;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) bad("config: expected a JSON object");
  RunConfig c;
  const json& h = require(j, "horizon", "config");
  if (!h.is_number_integer() || h.get<int>() < 1) bad("config.horizon must be an integer >= 1");
  const int T = h.get<int>();

  const json& sys = require(j, "system", "config");
  c.system.horizon = T;
  c.system.A = per_step(require(sys, "A", "system"), T, "system.A");
  c.system.B = per_step(require(sys, "B", "system"), T, "system.B");
  c.system.C = per_step(require(sys, "C", "system"), T, "system.C");
  c.system.Q = per_step(require(sys, "Q", "system"), T, "system.Q");
  c.system.Q.push_back(sys.contains("Q_terminal")
                           ? matrix_from_json(sys.at("Q_terminal"), "system.Q_terminal")
                           : c.system.Q.back());
  c.system.R = per_step(require(sys, "R", "system"), T, "system.R");
  c.system.validate();

  c.nominal = read_blocks(require(j, "nominal", "config"), T, "nominal");
  check_block_dims(c.nominal, c.system, "nominal");
  if (j.contains("reference")) {
    c.reference = read_blocks(j.at("reference"), T, "reference");
    check_block_dims(c.reference, c.system, "reference");
  } else {
    c.reference = identity_blocks(c.system);
  }

  const json& amb = require(j, "ambiguity", "config");
  const json& eps = require(amb, "epsilon", "ambiguity");
  if (!eps.is_number()) bad("ambiguity.epsilon must be a number");
  c.epsilon = eps.get<double>();
  check_epsilon(c.epsilon);
  const json& rx = require(amb, "rho_x0", "ambiguity");
  if (!rx.is_number()) bad("ambiguity.rho_x0 must be a number");
  c.rho_x0 = rx.get<double>();
  check_radius(c.rho_x0, "ambiguity.rho_x0");
  c.rho_w = per_step_radius(require(amb, "rho_w", "ambiguity"), T, "ambiguity.rho_w");
  c.rho_v = per_step_radius(require(amb, "rho_v", "ambiguity"), T, "ambiguity.rho_v");
  for (double r : c.rho_w) check_radius(r, "ambiguity.rho_w");
  for (double r : c.rho_v) check_radius(r, "ambiguity.rho_v");

  c.solver = json_io::options_from_json(j.value("solver", json()));
  if (j.contains("simulation")) {
    const json& sim = j.at("simulation");
    try {
      c.simulation.samples = sim.value("samples", c.simulation.samples);
      c.simulation.seed = sim.value("seed", c.simulation.seed);
    } catch (const json::exception& e) {
      bad(std::string("simulation: ") + e.what());
    }
    if (c.simulation.samples == 0) bad("simulation.samples must be >= 1");
  }
  return c;
}

json config_to_json(const RunConfig& c) {
  const auto& s = c.system;
  const std::vector<Matrix> stage_q(s.Q.begin(), s.Q.end() - 1);
  const auto blocks = [](const CovarianceBlocks& b) {
    return json{{"X0", matrix_to_json(b.X0.matrix())}, {"W", collapse(b.W)}, {"V", collapse(b.V)}};
  };
  json out;
  out["horizon"] = s.horizon;
  out["system"] = {{"A", collapse(s.A)},           {"B", collapse(s.B)},
                   {"C", collapse(s.C)},           {"Q", collapse(stage_q)},
                   {"Q_terminal", matrix_to_json(s.Q.back())}, {"R", collapse(s.R)}};
  out["nominal"] = blocks(c.nominal);
  out["reference"] = blocks(c.reference);
  out["ambiguity"] = {{"epsilon", c.epsilon},
                      {"rho_x0", c.rho_x0},
                      {"rho_w", collapse_radius(c.rho_w)},
                      {"rho_v", collapse_radius(c.rho_v)}};
  json solver = json_io::options_to_json(c.solver);
  solver.erase("seedless");
  out["solver"] = solver;
  out["simulation"] = {{"samples", c.simulation.samples}, {"seed", c.simulation.seed}};
  return out;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    bad("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const RunConfig& c) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : config_to_json(c).dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void apply_overrides(RunConfig& c, const Overrides& o) {
  if (o.epsilon) {
    check_epsilon(*o.epsilon);
    c.epsilon = *o.epsilon;
  }
  if (o.rho) {
    check_radius(*o.rho, "--rho");
    c.set_radii(*o.rho);
  }
  if (o.seed) c.simulation.seed = *o.seed;
  if (o.samples) {
    if (*o.samples == 0) bad("--samples must be >= 1");
    c.simulation.samples = *o.samples;
  }
  if (o.tol_gap) {
    if (!(*o.tol_gap > 0.0)) bad("--tol-gap must be positive");
    c.solver.tol_gap = *o.tol_gap;
  }
}

}  // namespace sinkhorn_lqg::cli

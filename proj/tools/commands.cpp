#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "config.hpp"
#include "sinkhorn_lqg/json_io.hpp"
#include "sinkhorn_lqg/oracle_suite.hpp"

namespace sinkhorn_lqg::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInfeasible:
      return kExitInfeasible;
    case ErrorCode::kNoConvergence:
    case ErrorCode::kBracketFailure:
    case ErrorCode::kSingularInnerSystem:
      return kExitNoConvergence;
    default:
      return kExitBadInput;
  }
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kInvalidInput, "cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

void write_summary(const fs::path& prefix, const CostSummary& s, const std::string& hash) {
  fs::path csv = prefix;
  csv += ".csv";
  fs::path summary = prefix;
  summary += ".json";
  if (csv.has_parent_path()) fs::create_directories(csv.parent_path());
  std::ofstream out(csv);
  if (!out) throw Error(ErrorCode::kInvalidInput, "cannot write '" + csv.string() + "'");
  json_io::write_costs_csv(out, s);
  write_json(summary, json_io::summary_to_json(s, hash));
}

json lqg_policy_json(const InnerSolution& lqg, const std::string& hash) {
  return {{"U", json_io::matrix_to_json(lqg.policy.U)},
          {"q", json_io::vector_to_json(lqg.policy.q)},
          {"value", json_io::real_to_json(lqg.value)},
          {"kind", "nominal-lqg"},
          {"config_hash", hash}};
}

Policy load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidInput, "cannot open policy file '" + path + "'");
  try {
    return json_io::policy_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, "policy '" + path + "' is not valid JSON: " + e.what());
  }
}

struct Context {
  std::string config_path;
  Overrides overrides;

  RunConfig load() const {
    RunConfig c = load_config(config_path);
    apply_overrides(c, overrides);
    return c;
  }
};

int cmd_check(const Context& ctx, const std::string& out_path) {
  const RunConfig c = ctx.load();
  const AmbiguityBlocks amb = c.ambiguity();
  json blocks = json::object();
  bool all = true;
  std::string first_bad;
  for (std::size_t b = 0; b < amb.block_count(); ++b) {
    const FeasibilityReport r = validate(amb.block(b));
    blocks[amb.block_name(b)] = json_io::report_to_json(r);
    if (!r.feasible && all) first_bad = amb.block_name(b);
    all = all && r.feasible;
  }
  const json report = {{"feasible", all}, {"blocks", blocks}, {"config_hash", config_hash(c)}};
  if (out_path.empty()) std::cout << report.dump(2) << '\n'; else write_json(out_path, report);
  if (!all) {
    std::cerr << "infeasible ambiguity block: " << first_bad << '\n';
    return kExitInfeasible;
  }
  return kExitOk;
}

int cmd_synthesize(const Context& ctx, const std::string& out_path) {
  const RunConfig c = ctx.load();
  const LiftedSystem sys = build_lifted(c.system);
  const AmbiguityBlocks amb = c.ambiguity();
  require_feasible(sys, amb);
  const GameSolution sol = solve_game(sys, amb, c.solver);
  write_json(out_path, json_io::solution_to_json(sol, c.solver, config_hash(c)));
  if (!sol.converged) {
    std::cerr << "solver stopped after " << sol.iterations << " iterations with Nash gap "
              << sol.nash_gap << '\n';
    return kExitNoConvergence;
  }
  return kExitOk;
}

int cmd_simulate(const Context& ctx, const std::string& policy_path,
                 const std::string& distribution, const std::string& out_prefix) {
  const RunConfig c = ctx.load();
  const LiftedSystem sys = build_lifted(c.system);
  Policy policy;
  try {
    policy = load_policy(policy_path);
    require_causal(sys, policy);
  } catch (const Error& e) {
    std::cerr << "bad policy file: " << e.what() << '\n';
    return kExitBadInput;
  }
  CovarianceBlocks blocks = c.nominal;
  if (distribution == "worst-case") {
    const AmbiguityBlocks amb = c.ambiguity();
    require_feasible(sys, amb);
    blocks = worst_case_for_policy(sys, policy, amb, c.solver).blocks;
  }
  write_summary(out_prefix, run_plan(sys, policy, blocks, c.simulation), config_hash(c));
  return kExitOk;
}

int cmd_compare(const Context& ctx, const std::string& out_dir) {
  const RunConfig c = ctx.load();
  const std::string hash = config_hash(c);
  const LiftedSystem sys = build_lifted(c.system);
  const AmbiguityBlocks amb = c.ambiguity();
  require_feasible(sys, amb);

  const InnerSolution lqg = nominal_lqg(sys, c.nominal);
  const GameSolution dr = solve_game(sys, amb, c.solver);
  const fs::path dir(out_dir);
  write_json(dir / "lqg_policy.json", lqg_policy_json(lqg, hash));
  write_json(dir / "dr_policy.json", json_io::solution_to_json(dr, c.solver, hash));

  const CovarianceBlocks lqg_worst = worst_case_for_policy(sys, lqg.policy, amb, c.solver).blocks;
  const CovarianceBlocks dr_worst = worst_case_for_policy(sys, dr.policy, amb, c.solver).blocks;
  const CostSummary lqg_nom = run_plan(sys, lqg.policy, c.nominal, c.simulation);
  const CostSummary lqg_wc = run_plan(sys, lqg.policy, lqg_worst, c.simulation);
  const CostSummary dr_nom = run_plan(sys, dr.policy, c.nominal, c.simulation);
  const CostSummary dr_wc = run_plan(sys, dr.policy, dr_worst, c.simulation);
  write_summary(dir / "lqg_nominal", lqg_nom, hash);
  write_summary(dir / "lqg_worst_case", lqg_wc, hash);
  write_summary(dir / "dr_nominal", dr_nom, hash);
  write_summary(dir / "dr_worst_case", dr_wc, hash);

  const json verdict = {
      {"dr_better_worst_case", dr_wc.empirical_mean < lqg_wc.empirical_mean},
      {"lqg_better_nominal", lqg_nom.empirical_mean < dr_nom.empirical_mean},
      {"means",
       {{"lqg_nominal", lqg_nom.empirical_mean},
        {"lqg_worst_case", lqg_wc.empirical_mean},
        {"dr_nominal", dr_nom.empirical_mean},
        {"dr_worst_case", dr_wc.empirical_mean}}},
      {"dr_converged", dr.converged},
      {"config_hash", hash}};
  write_json(dir / "verdict.json", verdict);
  std::cout << verdict.dump(2) << '\n';
  return dr.converged ? kExitOk : kExitNoConvergence;
}

int cmd_oracle(const std::string& suite, std::uint64_t seed, const std::string& out_path) {
  const json report = oracles::run_oracle_suite(oracles::parse_suite_kind(suite), seed);
  if (out_path.empty()) std::cout << report.dump(2) << '\n'; else write_json(out_path, report);
  if (oracles::suite_passed(report)) return kExitOk;
  std::cerr << "failed oracle checks:";
  for (const auto& [name, entry] : report.items()) {
    if (!entry.value("pass", false)) std::cerr << ' ' << name;
  }
  std::cerr << '\n';
  return kExitOracleFailure;
}

void add_config_options(CLI::App* sub, Context& ctx) {
  sub->add_option("-c,--config", ctx.config_path, "Run configuration (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--epsilon", ctx.overrides.epsilon, "Override ambiguity.epsilon");
  sub->add_option("--rho", ctx.overrides.rho, "Override every ambiguity radius");
  sub->add_option("--seed", ctx.overrides.seed, "Override simulation.seed");
  sub->add_option("--samples", ctx.overrides.samples, "Override simulation.samples");
  sub->add_option("--tol-gap", ctx.overrides.tol_gap, "Override solver.tol_gap");
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Distributionally robust finite-horizon LQG with Sinkhorn ambiguity sets",
               "sinkhorn-lqg"};
  app.require_subcommand(1);
  Context ctx;

  std::string out;
  auto* check = app.add_subcommand("check", "Validate every ambiguity block");
  add_config_options(check, ctx);
  check->add_option("-o,--out", out, "Write the report here instead of stdout");

  auto* synth = app.add_subcommand("synthesize", "Solve the robust control game");
  add_config_options(synth, ctx);
  synth->add_option("-o,--out", out, "Policy JSON")->required();

  std::string policy_path;
  std::string distribution = "nominal";
  auto* sim = app.add_subcommand("simulate", "Monte Carlo cost of a policy");
  add_config_options(sim, ctx);
  sim->add_option("-p,--policy", policy_path, "Policy JSON")->required();
  sim->add_option("-d,--distribution", distribution, "Noise distribution")
      ->check(CLI::IsMember({"nominal", "worst-case"}));
  sim->add_option("-o,--out", out, "Output prefix; writes <prefix>.csv and <prefix>.json")
      ->required();

  auto* compare = app.add_subcommand("compare", "Robust vs nominal LQG, 2x2 simulation grid");
  add_config_options(compare, ctx);
  compare->add_option("-o,--out-dir", out, "Output directory")->required();

  std::string suite = "default";
  std::uint64_t oracle_seed = 0;
  auto* oracle = app.add_subcommand("oracle", "Run the brute-force oracle suite");
  oracle->add_option("--suite", suite, "default, scalar or random")
      ->check(CLI::IsMember({"default", "scalar", "random"}));
  oracle->add_option("--seed", oracle_seed, "Seed for the random-matrix suite");
  oracle->add_option("-o,--out", out, "Write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (check->parsed()) return cmd_check(ctx, out);
    if (synth->parsed()) return cmd_synthesize(ctx, out);
    if (sim->parsed()) return cmd_simulate(ctx, policy_path, distribution, out);
    if (compare->parsed()) return cmd_compare(ctx, out);
    return cmd_oracle(suite, oracle_seed, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace sinkhorn_lqg::cli

#pragma once

namespace sinkhorn_lqg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitNoConvergence = 3;
inline constexpr int kExitBadInput = 4;
inline constexpr int kExitOracleFailure = 5;

/// Entry point of the sinkhorn-lqg tool.
int run_cli(int argc, char** argv);

}  // namespace sinkhorn_lqg::cli

#include "commands.hpp"

int main(int argc, char** argv) { return sinkhorn_lqg::cli::run_cli(argc, argv); }

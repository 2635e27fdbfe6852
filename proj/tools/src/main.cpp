#include "robq_cli/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  const auto parsed = robq::cli::parse_config(argc, argv);
  if (!parsed.config) {
    (parsed.exit_code == robq::cli::kExitOk ? std::cout : std::cerr) << parsed.message << '\n';
    return parsed.exit_code;
  }
  return robq::cli::run(*parsed.config, std::cout, std::cerr);
}

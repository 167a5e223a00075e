#pragma once
// Runs the command-line front end in-process.

#include <sstream>
#include <string>
#include <vector>

#include "chaos/cli.hpp"

namespace fixture {

struct CliResult {
  int code = -1;
  std::string out, err;
};

inline CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "chaosnet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = chaos::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace fixture

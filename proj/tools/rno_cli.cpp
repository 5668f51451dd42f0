// Copyright 2026 The RNO Workbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// rno: run one workbench command described by a problem file and emit the
// report.  The subcommand chooses what the file must ask for; everything
// else (model, objects, parameters) lives in the file so that a report is
// reproducible from the file bytes and the effective seed alone.  Wall time
// goes to stderr, never into the report.

#include <chrono>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rno/errors.hpp"
#include "rno/problem_io.hpp"

namespace {

struct CliArgs {
  std::string input;
  std::string output = "-";
  std::string format = "json";
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<int> restarts;
  bool tight_mode = false;
  bool overwrite_protect = false;
};

constexpr const char* kCommands[] = {
    "robustness",        "std-robustness",
    "geometric",         "transform",
    "channel-robustness", "smooth-channel-robustness",
    "diamond",           "divergence",
    "erasure-sweep",     "cost-bounds",
    "destruction-bounds", "capacity-bound",
    "seesaw",            "axioms",
};

int run(const std::string& command, const CliArgs& args) {
  rno::problem_io::Overrides overrides;
  overrides.seed = args.seed;
  overrides.tol = args.tol;
  overrides.max_iter = args.max_iter;
  overrides.restarts = args.restarts;
  if (args.tight_mode) overrides.tight_mode = true;

  const auto t0 = std::chrono::steady_clock::now();
  const auto pf = rno::problem_io::parse_problem_file(args.input, overrides);
  if (pf.command != command)
    throw rno::Error(rno::ErrorCode::ParseError,
                     "/command/name: file asks for '" + pf.command +
                         "' but the subcommand is '" + command + "'");
  const auto report = rno::problem_io::run_command(pf);
  rno::problem_io::emit_report(report, args.format, args.output,
                               args.overwrite_protect);
  const auto t1 = std::chrono::steady_clock::now();
  const double seconds =
      std::chrono::duration_cast<std::chrono::duration<double>>(t1 - t0)
          .count();
  std::fprintf(stderr, "rno %s: %.3f s\n", command.c_str(), seconds);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"resource-theory workbench"};
  app.require_subcommand(1);

  CliArgs args;
  std::string chosen;
  for (const char* name : kCommands) {
    CLI::App* sub = app.add_subcommand(
        name, std::string("run a '") + name + "' problem file");
    sub->add_option("--input", args.input, "problem file (JSON)")
        ->required();
    sub->add_option("--output", args.output,
                    "report path ('-' for stdout)");
    sub->add_option("--format", args.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--seed", args.seed, "override the file's seed");
    sub->add_option("--tol", args.tol, "override the solver tolerance");
    sub->add_option("--max-iter", args.max_iter,
                    "override the solver iteration cap");
    sub->add_option("--restarts", args.restarts,
                    "override the restart count for search heuristics");
    sub->add_flag("--tight-mode", args.tight_mode,
                  "sharpen tolerances for certification runs");
    sub->add_flag("--overwrite-protect", args.overwrite_protect,
                  "refuse to replace an existing output file");
    sub->callback([&chosen, name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    return run(chosen, args);
  } catch (const rno::Error& e) {
    std::fprintf(stderr, "rno: %s\n", e.what());
    return rno::error_exit_code(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "rno: unexpected error: %s\n", e.what());
    return 1;
  }
}

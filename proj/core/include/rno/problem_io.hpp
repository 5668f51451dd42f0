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

#ifndef RNO_PROBLEM_IO_HPP_
#define RNO_PROBLEM_IO_HPP_

// JSON problem files in, JSON/CSV reports out.
//
// A problem file names a command, declares the states and channels it needs
// (matrices as rows of [re, im] pairs), and optionally fixes a free-set
// model, a seed, and solver tolerances.  Parsing validates everything before
// any computation runs; running a parsed file produces a report whose bytes
// depend only on the file content and the effective seed.

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "rno/freesets.hpp"
#include "rno/qmath.hpp"

namespace rno::problem_io {

using Json = nlohmann::ordered_json;
using qmath::Channel;
using qmath::DensityMatrix;

// Command-line overrides; unset fields defer to the file, which defers to
// built-in defaults (the RNO_TOL environment variable replaces the built-in
// default tolerance only).
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<int> restarts;
  std::optional<bool> tight_mode;
};

struct ProblemFile {
  std::string version;
  std::optional<freesets::FreeSetModel> model;
  std::map<std::string, DensityMatrix> states;
  std::map<std::string, Channel> channels;
  std::string command;
  Json params;  // command parameters, validated at dispatch
  std::uint64_t seed = 1;
  double tol = 1e-7;
  int max_iter = 200000;
  int restarts = 8;
  bool tight_mode = false;
  std::string input_hash;  // content hash of the source text
};

// Schema violations raise ParseError carrying the JSON-pointer path of the
// offending field; object-level invariant violations (a matrix that is not a
// state, a Choi that is not trace preserving) raise ValidationError naming
// the object.
ProblemFile parse_problem_text(const std::string& text,
                               const Overrides& overrides = {});
ProblemFile parse_problem_file(const std::string& path,
                               const Overrides& overrides = {});

// Dispatches to the named operation and wraps the outcome in a report that
// embeds the input hash, the effective seed and tolerances, and the worst
// independently recomputed optimality residuals over every conic solve the
// command triggered.  Identical file text and seed give identical reports.
Json run_command(const ProblemFile& pf);

// Flattens a report for plotting: grid reports get one row per cell, scalar
// reports a single header/value pair of lines.
std::string report_to_csv(const Json& report);

// Writes atomically; refuses to replace an existing file when
// overwrite_protect is set.  Format is "json" or "csv".
void emit_report(const Json& report, const std::string& format,
                 const std::string& path, bool overwrite_protect = false);

}  // namespace rno::problem_io

#endif  // RNO_PROBLEM_IO_HPP_

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

#ifndef RNO_ERRORS_HPP_
#define RNO_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace rno {

// Error taxonomy shared by all modules.  The CLI maps categories to process
// exit codes: validation -> 1, solver -> 2, guard -> 3.
enum class ErrorCode {
  InvalidShape,
  InvalidState,
  InvalidChannel,
  InvalidSubsystem,
  InvalidRequest,
  InvalidProblem,
  InvalidSolution,
  SolverError,
  ConditionNotMet,
  HypothesisViolated,
  NotFreeComponent,
  TooLarge,
  ParseError,
  ValidationError,
  IoError,
};

const char* error_code_name(ErrorCode code);

// 1 = validation, 2 = solver, 3 = guard.
int error_exit_code(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rno

#endif  // RNO_ERRORS_HPP_

// Copyright 2026 The Trajshield Authors
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

#ifndef TRAJSHIELD_ERROR_H_
#define TRAJSHIELD_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace trajshield {

enum class ErrorCode {
  kInvalidArgument,
  kOutOfBounds,
  kUnknownVertex,
  kNoSuchEdge,
  kEmptyInput,
  kDimensionMismatch,
  kZeroEvidence,
  kEmptyWindow,
  kNonpositiveSensitivity,
  kZeroDistance,
  kZeroMass,
  kInfeasible,
  kDegeneratePls,
  kMissingMechanism,
  kParseError,
  kNoInBoundsFixes,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception. `step` carries
// the trajectory timestep for errors raised inside a pipeline, -1 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, int step = -1);

  ErrorCode code() const { return code_; }
  int step() const { return step_; }
  // The message without the code and step prefix.
  const std::string& message() const { return message_; }

  // Same error tagged with a timestep.
  Error WithStep(int step) const { return Error(code_, message_, step); }

 private:
  ErrorCode code_;
  int step_;
  std::string message_;
};

}  // namespace trajshield

#endif  // TRAJSHIELD_ERROR_H_

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

#include "trajshield/error.h"

namespace trajshield {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kOutOfBounds:
      return "OutOfBounds";
    case ErrorCode::kUnknownVertex:
      return "UnknownVertex";
    case ErrorCode::kNoSuchEdge:
      return "NoSuchEdge";
    case ErrorCode::kEmptyInput:
      return "EmptyInput";
    case ErrorCode::kDimensionMismatch:
      return "DimensionMismatch";
    case ErrorCode::kZeroEvidence:
      return "ZeroEvidence";
    case ErrorCode::kEmptyWindow:
      return "EmptyWindow";
    case ErrorCode::kNonpositiveSensitivity:
      return "NonpositiveSensitivity";
    case ErrorCode::kZeroDistance:
      return "ZeroDistance";
    case ErrorCode::kZeroMass:
      return "ZeroMass";
    case ErrorCode::kInfeasible:
      return "Infeasible";
    case ErrorCode::kDegeneratePls:
      return "DegeneratePLS";
    case ErrorCode::kMissingMechanism:
      return "MissingMechanism";
    case ErrorCode::kParseError:
      return "ParseError";
    case ErrorCode::kNoInBoundsFixes:
      return "NoInBoundsFixes";
    case ErrorCode::kIo:
      return "Io";
  }
  return "Unknown";
}

namespace {

std::string Decorate(ErrorCode code, const std::string& message, int step) {
  std::string out(ErrorCodeName(code));
  if (step >= 0) out += " at step " + std::to_string(step);
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, int step)
    : std::runtime_error(Decorate(code, message, step)),
      code_(code),
      step_(step),
      message_(message) {}

}  // namespace trajshield

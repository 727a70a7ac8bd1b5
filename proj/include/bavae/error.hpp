// Copyright 2026 The bavae Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BAVAE_ERROR_HPP_
#define BAVAE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace bavae {

// Mirrors bavae_status in the C API; values must stay in sync.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kInfeasible = 2,
  kDimension = 3,
  kIo = 4,
  kParse = 5,
  kDiverged = 6,
  kInternal = 99,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised when generation cannot satisfy its constraints (too few candidates).
class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what)
      : Error(ErrorCode::kInfeasible, what) {}
};

// Shape mismatch; the message names the offending op.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what)
      : Error(ErrorCode::kDimension, what) {}
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch)
      : Error(ErrorCode::kDiverged, what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

[[noreturn]] inline void throw_invalid(const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, what);
}

}  // namespace bavae

#endif  // BAVAE_ERROR_HPP_

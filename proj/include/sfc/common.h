// Copyright (c) the SFC Project Authors.
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

#ifndef SFC_COMMON_H_
#define SFC_COMMON_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sfc {

// Error taxonomy. The CLI maps these onto process exit codes:
//   ConfigError -> 2, DependencyError -> 3, DataError -> 4, DecodeError -> 5.
// InvalidArgumentError marks precondition violations of library operations.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class InvalidArgumentError : public Error {
 public:
  explicit InvalidArgumentError(const std::string& msg) : Error(msg) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

class DependencyError : public Error {
 public:
  explicit DependencyError(const std::string& msg) : Error(msg) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

class DecodeError : public Error {
 public:
  explicit DecodeError(const std::string& msg) : Error(msg) {}
};

inline void Check(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgumentError(msg);
}

}  // namespace sfc

#endif  // SFC_COMMON_H_

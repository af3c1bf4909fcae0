// Copyright 2026 The tiledet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TILEDET_ERRORS_HPP
#define TILEDET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tiledet {

// Exit codes: 0 success, 2 config error, 3 data error, 4 IO error.
class Error : public std::runtime_error {
 public:
  Error(std::string msg, int exit_code)
      : std::runtime_error(std::move(msg)), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg, 2) {}
};

// Structural problems in datasets, manifests or detection files.
class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg, 3) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg, 4) {}
};

}  // namespace tiledet

#endif  // TILEDET_ERRORS_HPP

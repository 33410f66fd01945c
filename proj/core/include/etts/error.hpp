// Copyright (c) 2026 The etts Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace etts {

/// Raised when an input violates an operation's precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File-system or decode failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A training loss term became NaN or infinite.
class NonFiniteLoss : public std::runtime_error {
 public:
  NonFiniteLoss(const std::string& term, long step)
      : std::runtime_error("non-finite loss term '" + term + "' at step " +
                           std::to_string(step)),
        term_(term) {}
  const std::string& term() const noexcept { return term_; }

 private:
  std::string term_;
};

namespace detail {
[[noreturn]] inline void fail(const std::string& msg) { throw InvalidArgument(msg); }
}  // namespace detail

}  // namespace etts

#define ETTS_CHECK(cond, msg)                                 \
  do {                                                        \
    if (!(cond)) ::etts::detail::fail(std::string(msg));      \
  } while (0)

/*
 Copyright 2026 The hybridopt Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef HYBRIDOPT_COMMON_ERRORS_HPP
#define HYBRIDOPT_COMMON_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hybridopt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or dimensionally inconsistent arguments.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// An operation called in a state that does not permit it.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// More switching events inside one integration step than the configured cap.
class ZenoError : public Error {
 public:
  ZenoError(const std::string& what, double time, int step_index = -1)
      : Error(what), time_(time), step_index_(step_index) {}

  double time() const { return time_; }
  int step_index() const { return step_index_; }

  ZenoError with_step(int step_index) const {
    return ZenoError(std::string(what()) + " (step " +
                         std::to_string(step_index) + ")",
                     time_, step_index);
  }

 private:
  double time_;
  int step_index_;
};

/// Training or optimization produced a non-finite quantity.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int episode = -1, int step = -1)
      : Error(what), episode_(episode), step_(step) {}

  int episode() const { return episode_; }
  int step() const { return step_; }

 private:
  int episode_;
  int step_;
};

}  // namespace hybridopt

#endif  // HYBRIDOPT_COMMON_ERRORS_HPP

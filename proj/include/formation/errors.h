// Copyright 2026 The Formation Maneuvering Authors
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

#ifndef FORMATION_ERRORS_H_
#define FORMATION_ERRORS_H_

#include <stdexcept>
#include <string>

namespace formation {

// Root of every error raised by the library.
class FormationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Spanning-tree validation failures.
class TreeError : public FormationError {
 public:
  using FormationError::FormationError;
};
class CycleError : public TreeError {
 public:
  using TreeError::TreeError;
};
class DisconnectedError : public TreeError {
 public:
  using TreeError::TreeError;
};
class CountError : public TreeError {
 public:
  using TreeError::TreeError;
};
class VertexRangeError : public TreeError {
 public:
  using TreeError::TreeError;
};

// |v_d| fell below the nonholonomic speed threshold.
class SingularSpeed : public FormationError {
 public:
  using FormationError::FormationError;
};

// Least-squares system failed its conditioning check.
class RankDeficient : public FormationError {
 public:
  using FormationError::FormationError;
};

// A pivot of the banded LU recursion vanished.
class PivotBreakdown : public FormationError {
 public:
  using FormationError::FormationError;
};

// Non-finite state encountered during integration.
class DivergenceError : public FormationError {
 public:
  DivergenceError(const std::string& what, double t)
      : FormationError(what), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

// Scenario ingestion.
class ParseError : public FormationError {
 public:
  using FormationError::FormationError;
};
class SchemaError : public FormationError {
 public:
  using FormationError::FormationError;
};
class ValidationError : public FormationError {
 public:
  using FormationError::FormationError;
};

class EmptyTrace : public FormationError {
 public:
  using FormationError::FormationError;
};

}  // namespace formation

#endif  // FORMATION_ERRORS_H_

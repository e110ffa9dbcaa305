// Copyright 2026 The pulsepol-dnp Authors
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

#ifndef PULSEPOL_ERRORS_HPP
#define PULSEPOL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pulsepol {

// Bad caller input: out-of-range parameters, wrong dimensions, unsupported
// harmonic.
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// A numerical invariant (Hermiticity, trace, positivity, CPTP, stochasticity)
// failed on a value that should satisfy it.
class InvariantViolation : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// The requested quantity is undefined for this input (zero precession
// frequency, frozen two-state chain, reducible Markov chain).
class Degenerate : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace pulsepol

#endif // PULSEPOL_ERRORS_HPP

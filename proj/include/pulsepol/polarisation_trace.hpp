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

#ifndef PULSEPOL_POLARISATION_TRACE_HPP
#define PULSEPOL_POLARISATION_TRACE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "pulsepol/pulsepol_seq.hpp"

namespace pulsepol {

struct SimConfig {
    SystemParams params;
    double period_T;
    int n_p = 4;
    std::uint64_t reps = 0;
    Harmonic harmonic{3};

    void validate() const;
};

// Polarisation versus repetition index or versus period.
struct PolarisationTrace {
    std::vector<double> abscissa;
    std::vector<double> polarisation;
    std::optional<SimConfig> metadata;

    // Throws InvariantViolation on length mismatch or |P| > 1 + 1e-9.
    void validate() const;
};

} // namespace pulsepol

#endif // PULSEPOL_POLARISATION_TRACE_HPP

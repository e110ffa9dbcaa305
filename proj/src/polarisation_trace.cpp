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

#include "pulsepol/polarisation_trace.hpp"

#include <cmath>

namespace pulsepol {

void SimConfig::validate() const {
    if (!(period_T > 0.0) || !std::isfinite(period_T))
        throw InvalidArgument("SimConfig: period must be positive");
    if (n_p < 1)
        throw InvalidArgument("SimConfig: N_p must be at least 1");
}

void PolarisationTrace::validate() const {
    if (abscissa.size() != polarisation.size())
        throw InvariantViolation("PolarisationTrace: abscissa and polarisation lengths differ");
    for (double v : polarisation)
        if (!(std::abs(v) <= 1.0 + 1e-9))
            throw InvariantViolation("PolarisationTrace: polarisation outside [-1, 1]");
}

} // namespace pulsepol

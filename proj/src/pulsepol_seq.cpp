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

#include "pulsepol/pulsepol_seq.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace pulsepol {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

void require_period(double period, const char *who) {
    if (!(period > 0.0) || !std::isfinite(period))
        throw InvalidArgument(std::string(who) + ": period must be positive and finite");
}

} // namespace

SystemParams::SystemParams(double omega_larmor, double a_parallel, double a_perpendicular)
    : omega_L_(omega_larmor), a_z_(a_parallel), a_x_(std::abs(a_perpendicular)) {
    if (!std::isfinite(omega_larmor) || !std::isfinite(a_parallel) ||
        !std::isfinite(a_perpendicular))
        throw InvalidArgument("SystemParams: non-finite value");
    if (!(omega_larmor > 0.0))
        throw InvalidArgument("SystemParams: Larmor frequency must be positive");
}

SystemParams SystemParams::from_khz(double larmor_khz, double az_khz, double ax_khz) {
    return SystemParams(khz_to_rad_per_s(larmor_khz), khz_to_rad_per_s(az_khz),
                        khz_to_rad_per_s(ax_khz));
}

Harmonic::Harmonic(int k) : k_(k) {
    if (k != 1 && k != 3 && k != 5)
        throw InvalidArgument("Harmonic: supported harmonics are 1, 3 and 5 (got " +
                              std::to_string(k) + ")");
}

double omega_I(const SystemParams &p) {
    const double w = std::hypot(p.omega_larmor() - 0.5 * p.a_z(), 0.5 * p.a_x());
    if (!(w > 0.0))
        throw Degenerate("omega_I: average nuclear precession frequency is zero");
    return w;
}

double resonant_period(const SystemParams &p, Harmonic k) { return k.k() * kPi / omega_I(p); }

double detuning(double period, const SystemParams &p, Harmonic k) {
    require_period(period, "detuning");
    return omega_I(p) - k.k() * kPi / period;
}

double period_for_detuning(double delta, const SystemParams &p, Harmonic k) {
    const double denom = omega_I(p) - delta;
    if (!(denom > 0.0))
        throw InvalidArgument("period_for_detuning: detuning must be below omega_I");
    return k.k() * kPi / denom;
}

double coupling_g(const SystemParams &p, Harmonic k) {
    const double ax = p.a_x();
    switch (k.k()) {
    case 1:
        return ax * (2.0 - kSqrt2) / (2.0 * kPi);
    case 3:
        return ax * (kSqrt2 + 2.0) / (6.0 * kPi);
    case 5:
        return ax * (kSqrt2 + 2.0) / (10.0 * kPi);
    default:
        throw InvalidArgument("coupling_g: unsupported harmonic");
    }
}

SecondOrderCouplings second_order_couplings(const SystemParams &p, double period, G2Model g2) {
    require_period(period, "second_order_couplings");
    const double g1 = coupling_g(p, Harmonic(1));
    const double g3 = coupling_g(p, Harmonic(3));
    const double g5 = coupling_g(p, Harmonic(5));
    const double g2_value = g2 == G2Model::kFifthHarmonic ? g5 : 0.0;
    const double delta = detuning(period, p, Harmonic(3));
    const double dt = delta * period;
    return {g3 + dt * (2.0 * g1 - g5) / (8.0 * kPi),
            dt * (g3 + 3.0 * g1 + 3.0 * g2_value) / (6.0 * kPi)};
}

double PulseSequence::total_free_time() const {
    return std::accumulate(intervals.begin(), intervals.end(), 0.0);
}

PulseSequence build_pulsepol_unit(double period) {
    require_period(period, "build_pulsepol_unit");
    const double tau = 0.25 * period;
    const double half_pi = 0.5 * kPi;
    PulseSequence seq;
    seq.period_T = period;
    seq.intervals = {tau, tau, tau, tau};
    seq.events = {
        {PulseAxis::kY, half_pi, 0.0},     {PulseAxis::kX, kPi, tau},
        {PulseAxis::kY, half_pi, 2 * tau}, {PulseAxis::kX, half_pi, 2 * tau},
        {PulseAxis::kY, kPi, 3 * tau},     {PulseAxis::kX, half_pi, period},
    };
    return seq;
}

} // namespace pulsepol

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

#ifndef PULSEPOL_PULSEPOL_SEQ_HPP
#define PULSEPOL_PULSEPOL_SEQ_HPP

#include <numbers>
#include <vector>

#include "pulsepol/errors.hpp"

namespace pulsepol {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Converts a frequency quoted as (value / 2pi) in kHz to rad/s.
constexpr double khz_to_rad_per_s(double khz) { return kTwoPi * 1e3 * khz; }
constexpr double rad_per_s_to_khz(double w) { return w / (kTwoPi * 1e3); }

// Electron-nuclear pair: nuclear Larmor frequency and hyperfine couplings,
// all angular frequencies in rad/s.
//
// A negative perpendicular coupling is stored as |A_x|; its sign only
// orients the perpendicular axis.
class SystemParams {
  public:
    SystemParams(double omega_larmor, double a_parallel, double a_perpendicular);

    static SystemParams from_khz(double larmor_khz, double az_khz, double ax_khz);

    double omega_larmor() const { return omega_L_; }
    double a_z() const { return a_z_; }
    double a_x() const { return a_x_; }

    SystemParams with_a_x(double a_perpendicular) const {
        return SystemParams(omega_L_, a_z_, a_perpendicular);
    }

  private:
    double omega_L_;
    double a_z_;
    double a_x_;
};

// Odd PulsePol resonance index. Only k = 1, 3, 5 have closed-form couplings.
class Harmonic {
  public:
    explicit Harmonic(int k);
    int k() const { return k_; }
    friend bool operator==(Harmonic, Harmonic) = default;

  private:
    int k_;
};

// Average nuclear precession frequency sqrt((wL - Az/2)^2 + (Ax/2)^2).
// Throws Degenerate if it vanishes.
double omega_I(const SystemParams &p);

// Resonant unit period T_r = k pi / omega_I.
double resonant_period(const SystemParams &p, Harmonic k);

// delta(T) = omega_I - k pi / T.
double detuning(double period, const SystemParams &p, Harmonic k);

// Period at which detuning(T, p, k) equals delta. Throws InvalidArgument if
// delta >= omega_I (no positive period).
double period_for_detuning(double delta, const SystemParams &p, Harmonic k);

// Effective flip-flop coupling at harmonic k:
//   g1 = Ax (2 - sqrt2) / 2pi,  g3 = Ax (sqrt2 + 2) / 6pi,  g5 = Ax (sqrt2 + 2) / 10pi.
double coupling_g(const SystemParams &p, Harmonic k);

// The flip-flip correction g_-(T) carries a term 3 g2 whose coupling is not
// fixed by the k = 1, 3, 5 closed forms. Two readings are provided.
enum class G2Model {
    kFifthHarmonic, // g2 := g5
    kZero,          // g2 := 0
};

struct SecondOrderCouplings {
    double g_plus;  // flip-flop, S+I- + S-I+
    double g_minus; // flip-flip, S+I+ + S-I-
};

// Couplings of the second-order average Hamiltonian around the k = 3
// resonance, with delta = detuning(T, p, 3):
//   g+ = g3 + delta T (2 g1 - g5) / 8pi
//   g- = delta T (g3 + 3 g1 + 3 g2) / 6pi
SecondOrderCouplings second_order_couplings(const SystemParams &p, double period,
                                            G2Model g2 = G2Model::kFifthHarmonic);

// Instantaneous electron rotation.
enum class PulseAxis { kX, kY };

struct PulseEvent {
    PulseAxis axis;
    double angle;  // pi/2 or pi
    double offset; // seconds from the unit start, in [0, T]
};

// One PulsePol unit: six instantaneous rotations and four free intervals of
// T/4. Event i is applied after intervals[0..i) have elapsed in the sense of
// the offsets; several events may share an offset (applied in list order).
struct PulseSequence {
    double period_T;
    std::vector<PulseEvent> events;
    std::vector<double> intervals;

    double total_free_time() const;
};

// (pi/2)_y - tau - (pi)_x - tau - (pi/2)_y (pi/2)_x - tau - (pi)_y - tau - (pi/2)_x
// with tau = T/4. Throws InvalidArgument for T <= 0.
PulseSequence build_pulsepol_unit(double period);

} // namespace pulsepol

#endif // PULSEPOL_PULSEPOL_SEQ_HPP

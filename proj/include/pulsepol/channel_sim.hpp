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

#ifndef PULSEPOL_CHANNEL_SIM_HPP
#define PULSEPOL_CHANNEL_SIM_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pulsepol/polarisation_trace.hpp"
#include "pulsepol/pulsepol_seq.hpp"
#include "pulsepol/spin_core.hpp"

namespace pulsepol {

// Electron pseudospin levels. The free Hamiltonian is
//   H0 = wL Iz + Sz (Az Iz + Ax Ix),   Sz = diag(0, -1)
// on {|0>, |-1>}, so it is block diagonal with nuclear blocks wL Iz and
// (wL - Az) Iz - Ax Ix. Pulses rotate the pseudospin: exp(-i theta sigma_a / 2).
enum class ElectronLevel : std::size_t { kZero = 0, kMinusOne = 1 };

// Level the electron is re-initialised into before every repetition. With the
// PulsePol unit of build_pulsepol_unit, this choice drives the nucleus
// towards |up> at the k = 3 resonance.
inline constexpr ElectronLevel kFreshElectron = ElectronLevel::kZero;

// Exact propagator of one PulsePol unit of period T (ideal pulses).
Mat4 unit_propagator(const SystemParams &p, double period);

// u^n by binary powering.
Mat4 matrix_power(const Mat4 &u, std::uint64_t n);

using Real3 = std::array<double, 3>;
using Real3x3 = std::array<Real3, 3>;

// Nuclear channel for one repetition as an affine map on Bloch vectors,
// b -> M b + c.
struct RepetitionChannel {
    Real3x3 M{};
    Real3 c{};

    static RepetitionChannel identity();

    BlochVector apply(const BlochVector &b) const;

    // Choi matrix sum_ij |i><j| (x) E(|i><j|) (trace 2).
    Mat4 choi() const;
    double choi_min_eigenvalue() const;
    double spectral_radius() const;

    // Throws InvariantViolation unless the Choi matrix is Hermitian with
    // eigenvalues >= -tol and the output is trace preserving.
    void check_cptp(double tol = 1e-10) const;
};

// E(rho) = Tr_e[ U^Np (|e><e| (x) rho) U^Np^dagger ] with e = kFreshElectron.
RepetitionChannel extract_channel(const SystemParams &p, double period, int n_p);

// Entries of M and c below this magnitude are rounding residue and are
// stored as exact zeros.
inline constexpr double kRoundoffFloor = 1e-14;

// Channel from an explicit one-repetition joint propagator.
RepetitionChannel channel_from_propagator(const Mat4 &w,
                                          ElectronLevel fresh = kFreshElectron);

struct TransitionProbs {
    double r_plus;  // |down> -> |up>
    double r_minus; // |up> -> |down>
};

TransitionProbs transition_probs_measured(const RepetitionChannel &e);

// Naive repetition loop b_{r+1} = M b_r + c from rho0. The trace holds
// R + 1 points (r = 0..R); abscissa is r.
PolarisationTrace iterate(const RepetitionChannel &e, const Rho2 &rho0, std::uint64_t reps);

// Final Bloch vector of the same loop.
BlochVector iterate_final(const RepetitionChannel &e, const BlochVector &b0, std::uint64_t reps);

// Homogeneous 4x4 real form [[M, c], [0, 1]] of the channel.
struct AffineMatrix {
    std::array<std::array<double, 4>, 4> a{};

    static AffineMatrix from(const RepetitionChannel &e);
    static AffineMatrix identity();
    friend AffineMatrix operator*(const AffineMatrix &x, const AffineMatrix &y);
    BlochVector apply(const BlochVector &b) const;
};

struct AffinePower {
    AffineMatrix value;
    std::size_t multiplications = 0;
};

// Exponentiation by squaring; reports the number of 4x4 products used.
AffinePower affine_power(const RepetitionChannel &e, std::uint64_t reps);

// b_R of the repetition loop from b0 (default: maximally mixed).
BlochVector fast_forward(const RepetitionChannel &e, std::uint64_t reps,
                         const BlochVector &b0 = {});

struct Asymptote {
    double p_inf;
    bool frozen;
};

inline constexpr double kFrozenSpectralGap = 1e-9;
inline constexpr std::uint64_t kFrozenHorizon = std::uint64_t{1} << 24;

// z-component of the fixed point (I - M)^-1 c when the spectral radius of M
// is below 1 - 1e-9; otherwise the channel has an invariant subspace and the
// result is the state reached after 2^24 repetitions from p0.
Asymptote asymptotic_polarisation(const RepetitionChannel &e, const BlochVector &p0 = {});

struct SweepOptions {
    int n_p = 4;
    std::optional<std::uint64_t> reps; // nullopt: asymptotic
    BlochVector initial{};             // default maximally mixed
    unsigned threads = 1;              // 0: hardware concurrency
};

// Polarisation per grid point. Points are independent; the output order
// matches the grid regardless of thread count.
PolarisationTrace envelope_sweep(const SystemParams &p, std::span<const double> periods,
                                 const SweepOptions &opts);

// Runs f(i) for i in [0, n) on up to `threads` workers (0 = auto).
void parallel_for_index(std::size_t n, unsigned threads, const std::function<void(std::size_t)> &f);

} // namespace pulsepol

#endif // PULSEPOL_CHANNEL_SIM_HPP

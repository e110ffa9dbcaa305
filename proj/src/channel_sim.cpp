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

#include "pulsepol/channel_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include <Eigen/Dense>

namespace pulsepol {

//----------------------------------------------------------------------------
// Propagators
//----------------------------------------------------------------------------

namespace {

// Block-diagonal joint operator from per-electron-level nuclear blocks.
Mat4 block_diag(const Mat2 &upper, const Mat2 &lower) {
    Mat4 out;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            out(i, j) = upper(i, j);
            out(2 + i, 2 + j) = lower(i, j);
        }
    return out;
}

Mat4 free_evolution(const SystemParams &p, double t) {
    const Mat2 h_zero = p.omega_larmor() * spin_half::sz();
    const Mat2 h_minus =
        (p.omega_larmor() - p.a_z()) * spin_half::sz() - p.a_x() * spin_half::sx();
    return block_diag(evolve(h_zero, t), evolve(h_minus, t));
}

Mat4 pulse(const PulseEvent &ev) {
    const Mat2 r = ev.axis == PulseAxis::kX ? rotation(1.0, 0.0, 0.0, ev.angle)
                                            : rotation(0.0, 1.0, 0.0, ev.angle);
    return kron(r, Mat2::identity());
}

} // namespace

Mat4 unit_propagator(const SystemParams &p, double period) {
    const PulseSequence seq = build_pulsepol_unit(period);
    // Free evolution between consecutive pulse offsets; coincident pulses
    // act back to back.
    Mat4 u = Mat4::identity();
    double now = 0.0;
    for (const auto &ev : seq.events) {
        if (ev.offset > now) {
            u = free_evolution(p, ev.offset - now) * u;
            now = ev.offset;
        }
        u = pulse(ev) * u;
    }
    if (seq.period_T > now)
        u = free_evolution(p, seq.period_T - now) * u;
    return u;
}

Mat4 matrix_power(const Mat4 &u, std::uint64_t n) {
    Mat4 result = Mat4::identity();
    Mat4 base = u;
    while (n > 0) {
        if (n & 1u)
            result = result * base;
        n >>= 1;
        if (n > 0)
            base = base * base;
    }
    return result;
}

//----------------------------------------------------------------------------
// Channel
//----------------------------------------------------------------------------

namespace {

// Pauli components (tr(sigma_l m) / 2) of a 2x2 operator.
Real3 pauli_components(const Mat2 &m) {
    return {0.5 * (m(0, 1) + m(1, 0)).real(), -0.5 * (m(0, 1) - m(1, 0)).imag(),
            0.5 * (m(0, 0) - m(1, 1)).real()};
}

} // namespace

RepetitionChannel RepetitionChannel::identity() {
    RepetitionChannel e;
    for (std::size_t i = 0; i < 3; ++i)
        e.M[i][i] = 1.0;
    return e;
}

BlochVector RepetitionChannel::apply(const BlochVector &b) const {
    const Real3 v{b.x, b.y, b.z};
    Real3 out = c;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            out[i] += M[i][j] * v[j];
    return {out[0], out[1], out[2]};
}

Mat4 RepetitionChannel::choi() const {
    // E(I) = I + c.sigma, E(sigma_k) = sum_l M_lk sigma_l.
    const Mat2 sig[3] = {pauli::x(), pauli::y(), pauli::z()};
    auto image_of_pauli = [&](std::size_t k) {
        Mat2 out;
        for (std::size_t l = 0; l < 3; ++l)
            out += M[l][k] * sig[l];
        return out;
    };
    Mat2 image_identity = Mat2::identity();
    for (std::size_t l = 0; l < 3; ++l)
        image_identity += c[l] * sig[l];

    const cplx i{0.0, 1.0};
    const Mat2 ex = image_of_pauli(0), ey = image_of_pauli(1), ez = image_of_pauli(2);
    // |0><0| = (I + Z)/2, |1><1| = (I - Z)/2, |0><1| = (X + iY)/2, |1><0| = (X - iY)/2.
    const Mat2 blocks[2][2] = {
        {0.5 * (image_identity + ez), 0.5 * (ex + i * ey)},
        {0.5 * (ex - i * ey), 0.5 * (image_identity - ez)},
    };
    Mat4 j;
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t r = 0; r < 2; ++r)
                for (std::size_t s = 0; s < 2; ++s)
                    j(2 * a + r, 2 * b + s) = blocks[a][b](r, s);
    return j;
}

double RepetitionChannel::choi_min_eigenvalue() const {
    const Mat4 j = choi();
    // Symmetrise away round-off before the Hermitian solver.
    const Mat4 h = 0.5 * (j + j.adjoint());
    return hermitian_eigen(h).values[0];
}

double RepetitionChannel::spectral_radius() const {
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            m(i, j) = M[i][j];
    const Eigen::EigenSolver<Eigen::Matrix3d> es(m, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

void RepetitionChannel::check_cptp(double tol) const {
    for (const auto &row : M)
        for (double v : row)
            if (!std::isfinite(v))
                throw InvariantViolation("channel: non-finite entry");
    const Mat4 j = choi();
    if (hermiticity_defect(j) > tol)
        throw InvariantViolation("channel: Choi matrix not Hermitian");
    // Trace preservation: Tr_out J = I.
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) {
            const cplx t = j(2 * a, 2 * b) + j(2 * a + 1, 2 * b + 1);
            if (std::abs(t - (a == b ? 1.0 : 0.0)) > tol)
                throw InvariantViolation("channel: not trace preserving");
        }
    const double lo = choi_min_eigenvalue();
    if (lo < -tol)
        throw InvariantViolation("channel: Choi matrix has eigenvalue " + std::to_string(lo));
}

RepetitionChannel channel_from_propagator(const Mat4 &w, ElectronLevel fresh) {
    // With the electron fresh in |e>, E(rho) = sum_f K_f rho K_f^dagger where
    // K_f = <f| W |e> is a nuclear 2x2 block.
    const std::size_t e = static_cast<std::size_t>(fresh);
    Mat2 kraus[2];
    for (std::size_t f = 0; f < 2; ++f)
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t s = 0; s < 2; ++s)
                kraus[f](r, s) = w(2 * f + r, 2 * e + s);
    auto channel = [&kraus](const Mat2 &rho) {
        return kraus[0] * rho * kraus[0].adjoint() + kraus[1] * rho * kraus[1].adjoint();
    };

    RepetitionChannel out;
    const Real3 shift = pauli_components(channel(0.5 * Mat2::identity()));
    for (std::size_t l = 0; l < 3; ++l)
        out.c[l] = 2.0 * shift[l];
    const Mat2 sig[3] = {pauli::x(), pauli::y(), pauli::z()};
    for (std::size_t k = 0; k < 3; ++k) {
        const Real3 col = pauli_components(channel(0.5 * sig[k]));
        for (std::size_t l = 0; l < 3; ++l)
            out.M[l][k] = 2.0 * col[l];
    }
    // Unitarity holds only to ~1e-16, and that residue compounds over the
    // 2^24-repetition horizon. Entries this small carry no physics.
    auto snap = [](double &v) {
        if (std::abs(v) < kRoundoffFloor)
            v = 0.0;
    };
    for (auto &row : out.M)
        for (double &v : row)
            snap(v);
    for (double &v : out.c)
        snap(v);
    return out;
}

RepetitionChannel extract_channel(const SystemParams &p, double period, int n_p) {
    if (n_p < 1)
        throw InvalidArgument("extract_channel: N_p must be at least 1");
    const Mat4 w = matrix_power(unit_propagator(p, period), static_cast<std::uint64_t>(n_p));
    RepetitionChannel e = channel_from_propagator(w);
    e.check_cptp();
    return e;
}

TransitionProbs transition_probs_measured(const RepetitionChannel &e) {
    const double mzz = e.M[2][2];
    const double cz = e.c[2];
    return {std::clamp(0.5 * (1.0 - mzz + cz), 0.0, 1.0),
            std::clamp(0.5 * (1.0 - mzz - cz), 0.0, 1.0)};
}

//----------------------------------------------------------------------------
// Iteration
//----------------------------------------------------------------------------

PolarisationTrace iterate(const RepetitionChannel &e, const Rho2 &rho0, std::uint64_t reps) {
    PolarisationTrace trace;
    trace.abscissa.reserve(reps + 1);
    trace.polarisation.reserve(reps + 1);
    BlochVector b = to_bloch(rho0);
    trace.abscissa.push_back(0.0);
    trace.polarisation.push_back(b.z);
    for (std::uint64_t r = 1; r <= reps; ++r) {
        b = e.apply(b);
        trace.abscissa.push_back(static_cast<double>(r));
        trace.polarisation.push_back(b.z);
    }
    return trace;
}

BlochVector iterate_final(const RepetitionChannel &e, const BlochVector &b0, std::uint64_t reps) {
    BlochVector b = b0;
    for (std::uint64_t r = 0; r < reps; ++r)
        b = e.apply(b);
    return b;
}

AffineMatrix AffineMatrix::from(const RepetitionChannel &e) {
    AffineMatrix out;
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j)
            out.a[i][j] = e.M[i][j];
        out.a[i][3] = e.c[i];
    }
    out.a[3][3] = 1.0;
    return out;
}

AffineMatrix AffineMatrix::identity() {
    AffineMatrix out;
    for (std::size_t i = 0; i < 4; ++i)
        out.a[i][i] = 1.0;
    return out;
}

AffineMatrix operator*(const AffineMatrix &x, const AffineMatrix &y) {
    AffineMatrix out;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t k = 0; k < 4; ++k)
            for (std::size_t j = 0; j < 4; ++j)
                out.a[i][j] += x.a[i][k] * y.a[k][j];
    return out;
}

BlochVector AffineMatrix::apply(const BlochVector &b) const {
    const double v[4] = {b.x, b.y, b.z, 1.0};
    double out[3] = {0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            out[i] += a[i][j] * v[j];
    return {out[0], out[1], out[2]};
}

AffinePower affine_power(const RepetitionChannel &e, std::uint64_t reps) {
    AffinePower out{AffineMatrix::identity(), 0};
    AffineMatrix base = AffineMatrix::from(e);
    bool have_result = false;
    while (reps > 0) {
        if (reps & 1u) {
            if (have_result) {
                out.value = out.value * base;
                ++out.multiplications;
            } else {
                out.value = base;
                have_result = true;
            }
        }
        reps >>= 1;
        if (reps > 0) {
            base = base * base;
            ++out.multiplications;
        }
    }
    return out;
}

BlochVector fast_forward(const RepetitionChannel &e, std::uint64_t reps, const BlochVector &b0) {
    return affine_power(e, reps).value.apply(b0);
}

Asymptote asymptotic_polarisation(const RepetitionChannel &e, const BlochVector &p0) {
    if (e.spectral_radius() < 1.0 - kFrozenSpectralGap) {
        Eigen::Matrix3d a;
        Eigen::Vector3d c;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j)
                a(i, j) = (i == j ? 1.0 : 0.0) - e.M[i][j];
            c(i) = e.c[i];
        }
        const Eigen::Vector3d fixed = a.partialPivLu().solve(c);
        return {std::clamp(fixed(2), -1.0, 1.0), false};
    }
    return {fast_forward(e, kFrozenHorizon, p0).z, true};
}

//----------------------------------------------------------------------------
// Sweeps
//----------------------------------------------------------------------------

void parallel_for_index(std::size_t n, unsigned threads,
                        const std::function<void(std::size_t)> &f) {
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        });
    for (auto &th : pool)
        th.join();
    if (failure)
        std::rethrow_exception(failure);
}

PolarisationTrace envelope_sweep(const SystemParams &p, std::span<const double> periods,
                                 const SweepOptions &opts) {
    PolarisationTrace trace;
    trace.abscissa.assign(periods.begin(), periods.end());
    trace.polarisation.assign(periods.size(), 0.0);
    parallel_for_index(periods.size(), opts.threads, [&](std::size_t i) {
        const RepetitionChannel e = extract_channel(p, periods[i], opts.n_p);
        trace.polarisation[i] = opts.reps ? fast_forward(e, *opts.reps, opts.initial).z
                                          : asymptotic_polarisation(e, opts.initial).p_inf;
    });
    trace.validate();
    return trace;
}

} // namespace pulsepol

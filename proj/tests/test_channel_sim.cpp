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

#include <cmath>
#include <numbers>

#include "gtest/gtest.h"

#include "test_util.hpp"

using namespace pulsepol;

namespace {

SystemParams weak_spin() { return SystemParams::from_khz(428.0, -50.0, 9.0); }

RepetitionChannel random_channel(test_support::Gen &gen) {
    const Mat4 u = evolve(gen.hermitian<4>(2.0), 1.0);
    const ElectronLevel fresh =
        gen.integer(0, 1) == 0 ? ElectronLevel::kZero : ElectronLevel::kMinusOne;
    return channel_from_propagator(u, fresh);
}

// Channel mapping every state to |up><up|.
RepetitionChannel reset_to_up() {
    RepetitionChannel e;
    e.c = {0.0, 0.0, 1.0};
    return e;
}

// Flip-flop oracle g (S+ I- + S- I+) in the electron (x) nucleus basis.
Mat4 flip_flop(double g) {
    const Mat4 h = kron(spin_half::raise(), spin_half::lower()) +
                   kron(spin_half::lower(), spin_half::raise());
    return g * h;
}

// |W_ij|^2, insensitive to the diagonal frame phases.
std::array<std::array<double, 4>, 4> populations(const Mat4 &w) {
    std::array<std::array<double, 4>, 4> out{};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            out[i][j] = std::norm(w(i, j));
    return out;
}

double population_distance(const Mat4 &a, const Mat4 &b) {
    const auto pa = populations(a), pb = populations(b);
    double d = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            d = std::max(d, std::abs(pa[i][j] - pb[i][j]));
    return d;
}

} // namespace

TEST(unit_propagator, decoupled_is_block_diagonal) {
    const SystemParams p = SystemParams::from_khz(428.0, -50.0, 0.0);
    const Mat4 u = unit_propagator(p, 3.1e-6);
    // Pulses flip the electron, but the nuclear populations never mix.
    for (std::size_t e = 0; e < 2; ++e)
        for (std::size_t f = 0; f < 2; ++f) {
            EXPECT_LT(std::abs(u(2 * e, 2 * f + 1)), 1e-14);
            EXPECT_LT(std::abs(u(2 * e + 1, 2 * f)), 1e-14);
        }
    const RepetitionChannel ch = extract_channel(p, 3.1e-6, 4);
    EXPECT_NEAR(fast_forward(ch, 1000, {0.0, 0.0, 0.3}).z, 0.3, 1e-12);
}

TEST(unit_propagator, unitary_property) {
    test_support::Gen gen(31);
    for (int trial = 0; trial < 1000; ++trial) {
        const SystemParams p = gen.params();
        EXPECT_LT(unitarity_defect(unit_propagator(p, gen.period_near_resonance(p))), 1e-12);
    }
}

TEST(unit_propagator, approaches_flip_flop_at_resonance) {
    // Az = 0 so the nuclear axis stays along z. Keep g3 Np T = pi/4 while Ax
    // shrinks; the population pattern must converge to the flip-flop oracle.
    double previous = 1.0;
    for (int n_p : {8, 16, 32, 64}) {
        const SystemParams probe = SystemParams::from_khz(428.0, 0.0, 1.0);
        const double tr = resonant_period(probe, Harmonic(3));
        const double g3_target = std::numbers::pi / 4.0 / (n_p * tr);
        const double ax = g3_target * 6.0 * std::numbers::pi / (std::numbers::sqrt2 + 2.0);
        const SystemParams p(probe.omega_larmor(), 0.0, ax);
        const double t = resonant_period(p, Harmonic(3));
        const Mat4 w = matrix_power(unit_propagator(p, t), n_p);
        const Mat4 oracle = evolve(flip_flop(coupling_g(p, Harmonic(3))), n_p * t);
        const double d = population_distance(w, oracle);
        EXPECT_LT(d, previous);
        previous = d;
    }
    EXPECT_LT(previous, 2e-3);
}

TEST(matrix_power, agrees_with_repeated_product) {
    test_support::Gen gen(32);
    const Mat4 u = evolve(gen.hermitian<4>(), 0.7);
    Mat4 acc = Mat4::identity();
    for (std::uint64_t n = 0; n < 20; ++n) {
        EXPECT_LT(max_abs(matrix_power(u, n) - acc), 1e-13);
        acc = acc * u;
    }
}

TEST(extract_channel, decoupled_freezes_populations) {
    const RepetitionChannel e = extract_channel(SystemParams::from_khz(428.0, -50.0, 0.0), 3.3e-6, 4);
    EXPECT_NEAR(e.M[2][2], 1.0, 1e-12);
    EXPECT_NEAR(e.c[2], 0.0, 1e-12);
}

TEST(extract_channel, cptp_property) {
    test_support::Gen gen(33);
    for (int trial = 0; trial < 1000; ++trial) {
        const SystemParams p = gen.params();
        const double t = gen.period_near_resonance(p);
        const int n_p = gen.integer(1, 12);
        const RepetitionChannel e = extract_channel(p, t, n_p);
        EXPECT_GE(e.choi_min_eigenvalue(), -1e-10);
        EXPECT_LE(e.spectral_radius(), 1.0 + 1e-10);
        const BlochVector b = fast_forward(e, 37, gen.bloch());
        EXPECT_LE(std::abs(b.z), 1.0 + 1e-9);
    }
}

TEST(extract_channel, half_flip_flop_resets_to_up) {
    // Az = 0, Ax tuned so that g3 Np T_r = pi/2 with Np = 46.
    const int n_p = 46;
    const SystemParams probe = SystemParams::from_khz(428.0, 0.0, 9.0);
    const double tr = resonant_period(probe, Harmonic(3));
    const double g3 = std::numbers::pi / 2.0 / (n_p * tr);
    const SystemParams p(probe.omega_larmor(), 0.0,
                         g3 * 6.0 * std::numbers::pi / (std::numbers::sqrt2 + 2.0));
    const RepetitionChannel e = extract_channel(p, resonant_period(p, Harmonic(3)), n_p);
    EXPECT_NEAR(e.c[2], 1.0, 1e-2);
    EXPECT_LT(std::hypot(e.c[0], e.c[1]), 5e-2);
    for (const auto &row : e.M)
        for (double v : row)
            EXPECT_LT(std::abs(v), 5e-2);
    EXPECT_NEAR(transition_probs_measured(e).r_plus, 1.0, 1e-2);
}

TEST(check_cptp, rejects_unphysical_map) {
    RepetitionChannel bad = RepetitionChannel::identity();
    bad.M[0][0] = 1.5;
    EXPECT_THROW(bad.check_cptp(), InvariantViolation);
    RepetitionChannel amplifier;
    amplifier.c = {0.0, 0.0, 1.2};
    EXPECT_THROW(amplifier.check_cptp(), InvariantViolation);
    EXPECT_NO_THROW(RepetitionChannel::identity().check_cptp());
    EXPECT_NO_THROW(reset_to_up().check_cptp());
}

TEST(channel_from_propagator, random_channels_are_cptp) {
    test_support::Gen gen(34);
    for (int trial = 0; trial < 200; ++trial)
        EXPECT_NO_THROW(random_channel(gen).check_cptp());
}

TEST(channel_from_propagator, matches_density_matrix_route) {
    // Independent route: full joint density matrix, reinitialise, trace out.
    test_support::Gen gen(35);
    for (int trial = 0; trial < 50; ++trial) {
        const SystemParams p = gen.params();
        const Mat4 w = matrix_power(unit_propagator(p, gen.period_near_resonance(p)), 3);
        const RepetitionChannel e = channel_from_propagator(w);
        const Rho2 rho_n = gen.density<2>();
        const Rho4 joint(kron(Rho2::basis_state(0).matrix(), rho_n.matrix()));
        const Rho2 out = partial_trace_electron(Rho4(w * joint.matrix() * w.adjoint()));
        const BlochVector expected = to_bloch(out);
        const BlochVector got = e.apply(to_bloch(rho_n));
        EXPECT_NEAR(got.x, expected.x, 1e-12);
        EXPECT_NEAR(got.y, expected.y, 1e-12);
        EXPECT_NEAR(got.z, expected.z, 1e-12);
    }
}

TEST(transition_probs_measured, examples) {
    const auto id = transition_probs_measured(RepetitionChannel::identity());
    EXPECT_DOUBLE_EQ(id.r_plus, 0.0);
    EXPECT_DOUBLE_EQ(id.r_minus, 0.0);
    const auto up = transition_probs_measured(reset_to_up());
    EXPECT_DOUBLE_EQ(up.r_plus, 1.0);
    EXPECT_DOUBLE_EQ(up.r_minus, 0.0);
    const auto dep = transition_probs_measured(RepetitionChannel{});
    EXPECT_DOUBLE_EQ(dep.r_plus, 0.5);
    EXPECT_DOUBLE_EQ(dep.r_minus, 0.5);
}

TEST(transition_probs_measured, resonant_first_order_agreement) {
    // Az = 0: the nuclear axis is z, so the bare g3 applies.
    const SystemParams p = SystemParams::from_khz(428.0, 0.0, 9.0);
    const double tr = resonant_period(p, Harmonic(3));
    const double g3 = coupling_g(p, Harmonic(3));
    for (int n_p : {1, 2, 4, 8, 16}) {
        const auto r = transition_probs_measured(extract_channel(p, tr, n_p));
        const double s = std::sin(g3 * n_p * tr);
        // A single unit leaves an unbalanced half-cycle (r- ~ 1.1e-4); whole
        // pairs of units cancel it.
        if (n_p > 1)
            EXPECT_LE(r.r_minus, 1e-4) << "Np=" << n_p;
        EXPECT_LT(std::abs(r.r_plus - s * s), 5e-3) << "Np=" << n_p;
    }
}

TEST(iterate, zero_reps_from_mixed_start) {
    const PolarisationTrace t = iterate(reset_to_up(), Rho2::maximally_mixed(), 0);
    ASSERT_EQ(t.polarisation.size(), 1u);
    EXPECT_EQ(t.polarisation[0], 0.0);
}

TEST(iterate, identity_channel_is_constant) {
    const Rho2 rho = from_bloch({0.1, -0.2, 0.4});
    const PolarisationTrace t = iterate(RepetitionChannel::identity(), rho, 50);
    ASSERT_EQ(t.polarisation.size(), 51u);
    for (double v : t.polarisation)
        EXPECT_NEAR(v, 0.4, 1e-15);
    EXPECT_EQ(t.abscissa.back(), 50.0);
}

TEST(iterate, resonant_convergence) {
    const SystemParams p = weak_spin();
    const RepetitionChannel e = extract_channel(p, resonant_period(p, Harmonic(3)), 4);
    const PolarisationTrace t = iterate(e, Rho2::maximally_mixed(), 10000);
    EXPECT_GE(t.polarisation.back(), 0.999);
    t.validate();
}

TEST(fast_forward, agrees_with_iterate_on_random_channels) {
    test_support::Gen gen(36);
    for (int trial = 0; trial < 100; ++trial) {
        const RepetitionChannel e = random_channel(gen);
        const BlochVector b0 = gen.bloch();
        for (std::uint64_t reps : {1u, 2u, 3u, 10u, 1000u}) {
            const BlochVector fast = fast_forward(e, reps, b0);
            const BlochVector slow = iterate_final(e, b0, reps);
            EXPECT_NEAR(fast.x, slow.x, 1e-10);
            EXPECT_NEAR(fast.y, slow.y, 1e-10);
            EXPECT_NEAR(fast.z, slow.z, 1e-10);
        }
    }
}

TEST(fast_forward, single_step_is_affine_image) {
    test_support::Gen gen(37);
    const RepetitionChannel e = random_channel(gen);
    const BlochVector b0 = gen.bloch();
    EXPECT_EQ(fast_forward(e, 1, b0), e.apply(b0));
    EXPECT_EQ(fast_forward(e, 0, b0), b0);
}

TEST(fast_forward, operation_count_is_logarithmic) {
    const RepetitionChannel e = reset_to_up();
    for (unsigned k = 1; k <= 40; ++k)
        EXPECT_EQ(affine_power(e, std::uint64_t{1} << k).multiplications, k);
    EXPECT_LE(affine_power(e, 200000).multiplications, 2 * 18u);
}

TEST(asymptotic_polarisation, examples) {
    const Asymptote up = asymptotic_polarisation(reset_to_up());
    EXPECT_NEAR(up.p_inf, 1.0, 1e-15);
    EXPECT_FALSE(up.frozen);
    const Asymptote id = asymptotic_polarisation(RepetitionChannel::identity());
    EXPECT_EQ(id.p_inf, 0.0);
    EXPECT_TRUE(id.frozen);
    const Asymptote kept = asymptotic_polarisation(RepetitionChannel::identity(), {0.0, 0.0, 0.25});
    EXPECT_EQ(kept.p_inf, 0.25);
}

TEST(asymptotic_polarisation, weak_spin_resonance) {
    const SystemParams p = weak_spin();
    const RepetitionChannel e = extract_channel(p, resonant_period(p, Harmonic(3)), 4);
    EXPECT_NEAR(asymptotic_polarisation(e).p_inf, 1.0, 1e-3);
}

TEST(asymptotic_polarisation, matches_long_horizon_on_random_channels) {
    test_support::Gen gen(38);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const RepetitionChannel e = random_channel(gen);
        const Asymptote a = asymptotic_polarisation(e);
        if (a.frozen)
            continue;
        ++checked;
        EXPECT_NEAR(a.p_inf, fast_forward(e, kFrozenHorizon).z, 1e-6);
    }
    EXPECT_GT(checked, 150);
}

TEST(envelope_sweep, decoupled_is_flat_zero) {
    const SystemParams p = SystemParams::from_khz(428.0, -50.0, 0.0);
    std::vector<double> grid;
    for (int i = 0; i < 30; ++i)
        grid.push_back((2.5 + 0.05 * i) * 1e-6);
    for (std::optional<std::uint64_t> reps : {std::optional<std::uint64_t>{}, std::optional<std::uint64_t>{200000}}) {
        SweepOptions opts;
        opts.reps = reps;
        for (double v : envelope_sweep(p, grid, opts).polarisation)
            EXPECT_EQ(v, 0.0);
    }
}

TEST(envelope_sweep, maximum_at_resonance_for_weak_coupling) {
    const SystemParams p = weak_spin();
    const double tr = resonant_period(p, Harmonic(3));
    std::vector<double> grid;
    for (int i = -10; i <= 10; ++i)
        grid.push_back(tr * (1.0 + 0.002 * i));
    const PolarisationTrace t = envelope_sweep(p, grid, {});
    const auto best = std::max_element(t.polarisation.begin(), t.polarisation.end());
    EXPECT_EQ(best - t.polarisation.begin(), 10);
    EXPECT_GT(*best, 0.999);
}

TEST(envelope_sweep, strong_coupling_reaches_opposite_polarisation) {
    const SystemParams p = SystemParams::from_khz(428.0, -10.0, 60.0);
    std::vector<double> grid;
    for (int i = 0; i <= 300; ++i)
        grid.push_back((2.85 + 0.0002 * i) * 1e-6);
    const PolarisationTrace t = envelope_sweep(p, grid, {});
    EXPECT_LE(*std::min_element(t.polarisation.begin(), t.polarisation.end()), -0.9);
}

TEST(envelope_sweep, singleton_matches_direct_call) {
    const SystemParams p = weak_spin();
    const double t = 3.25e-6;
    const std::vector<double> grid{t};
    EXPECT_EQ(envelope_sweep(p, grid, {}).polarisation[0],
              asymptotic_polarisation(extract_channel(p, t, 4)).p_inf);
}

TEST(envelope_sweep, thread_count_does_not_change_output) {
    const SystemParams p = weak_spin();
    std::vector<double> grid;
    for (int i = 0; i < 64; ++i)
        grid.push_back((3.0 + 0.01 * i) * 1e-6);
    SweepOptions serial;
    SweepOptions parallel;
    parallel.threads = 4;
    EXPECT_EQ(envelope_sweep(p, grid, serial).polarisation,
              envelope_sweep(p, grid, parallel).polarisation);
}

TEST(polarisation_trace, validate) {
    PolarisationTrace t;
    t.abscissa = {1.0, 2.0};
    t.polarisation = {0.5};
    EXPECT_THROW(t.validate(), InvariantViolation);
    t.polarisation = {0.5, 1.1};
    EXPECT_THROW(t.validate(), InvariantViolation);
    t.polarisation = {0.5, -1.0};
    EXPECT_NO_THROW(t.validate());
}

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

#include "pulsepol/markov_model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

namespace pulsepol {

namespace {

constexpr double kUnitEigenvalueTol = 1e-9;
constexpr double kDistributionTol = 1e-10;

Eigen::VectorXd to_vector(std::span<const double> p, std::size_t dim) {
    if (p.size() != dim)
        throw InvalidArgument("distribution length does not match chain dimension");
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0))
            throw InvalidArgument("distribution has a negative or non-finite entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kDistributionTol)
        throw InvalidArgument("distribution does not sum to 1");
    return Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
}

Distribution to_distribution(const Eigen::VectorXd &v) {
    return Distribution(v.data(), v.data() + v.size());
}

bool is_distribution(const Eigen::VectorXd &v, double tol) {
    if (!v.allFinite() || std::abs(v.sum() - 1.0) > tol)
        return false;
    return v.minCoeff() >= -tol;
}

Eigen::VectorXd evolve_by_squaring(const Eigen::MatrixXd &q, Eigen::VectorXd p,
                                   std::uint64_t reps) {
    Eigen::MatrixXd base = q;
    while (reps > 0) {
        if (reps & 1u)
            p = base * p;
        reps >>= 1;
        if (reps > 0)
            base = base * base;
    }
    return p;
}

} // namespace

TransitionMatrix::TransitionMatrix(Eigen::MatrixXd q) : q_(std::move(q)) {
    if (q_.rows() != q_.cols() || q_.rows() < 2)
        throw InvalidArgument("TransitionMatrix: must be square with D >= 2");
    if (!q_.allFinite() || q_.minCoeff() < 0.0)
        throw InvalidArgument("TransitionMatrix: entries must be finite and non-negative");
    for (Eigen::Index m = 0; m < q_.cols(); ++m)
        if (std::abs(q_.col(m).sum() - 1.0) > kTolerance)
            throw InvalidArgument("TransitionMatrix: column " + std::to_string(m) +
                                  " does not sum to 1");
}

Distribution chain_evolve(const TransitionMatrix &q, std::span<const double> p0,
                          std::uint64_t reps) {
    const Eigen::VectorXd p = to_vector(p0, q.dim());
    if (reps == 0)
        return to_distribution(p);

    const Eigen::EigenSolver<Eigen::MatrixXd> es(q.matrix());
    if (es.info() == Eigen::Success) {
        const Eigen::MatrixXcd &vecs = es.eigenvectors();
        const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(vecs);
        // Defective (or nearly defective) Q: the eigenbasis is singular.
        if (std::abs(lu.determinant()) > 1e-10) {
            const Eigen::VectorXcd coeffs = lu.solve(p.cast<std::complex<double>>());
            Eigen::VectorXcd powered = coeffs;
            for (Eigen::Index n = 0; n < powered.size(); ++n)
                powered(n) *= std::pow(es.eigenvalues()(n), static_cast<double>(reps));
            const Eigen::VectorXd out = (vecs * powered).real();
            if (is_distribution(out, kDistributionTol))
                return to_distribution(out);
        }
    }
    return to_distribution(evolve_by_squaring(q.matrix(), p, reps));
}

Distribution chain_evolve_naive(const TransitionMatrix &q, std::span<const double> p0,
                                std::uint64_t reps) {
    Eigen::VectorXd p = to_vector(p0, q.dim());
    for (std::uint64_t r = 0; r < reps; ++r)
        p = q.matrix() * p;
    return to_distribution(p);
}

Distribution stationary_distribution(const TransitionMatrix &q) {
    const Eigen::EigenSolver<Eigen::MatrixXd> es(q.matrix());
    if (es.info() != Eigen::Success)
        throw InvariantViolation("stationary_distribution: eigen-decomposition failed");
    Eigen::Index unit = -1;
    int count = 0;
    for (Eigen::Index n = 0; n < es.eigenvalues().size(); ++n)
        if (std::abs(es.eigenvalues()(n) - 1.0) < kUnitEigenvalueTol) {
            unit = n;
            ++count;
        }
    if (count == 0)
        throw InvariantViolation("stationary_distribution: no unit eigenvalue");
    if (count > 1)
        throw Degenerate("stationary_distribution: " + std::to_string(count) +
                         " unit eigenvalues (reducible chain)");

    Eigen::VectorXd v = es.eigenvectors().col(unit).real();
    v /= v.sum();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v(i) < -1e-12)
            throw InvariantViolation("stationary_distribution: negative stationary weight");
        v(i) = std::max(v(i), 0.0);
    }
    return to_distribution(v / v.sum());
}

TwoStateChain::TwoStateChain(double plus, double minus) : r_plus(plus), r_minus(minus) {
    if (!(plus >= 0.0 && plus <= 1.0) || !(minus >= 0.0 && minus <= 1.0))
        throw InvalidArgument("TwoStateChain: probabilities must lie in [0, 1]");
}

TransitionMatrix TwoStateChain::matrix() const {
    Eigen::Matrix2d q;
    q << 1.0 - r_minus, r_plus,  //
        r_minus, 1.0 - r_plus;
    return TransitionMatrix(q);
}

double stationary_polarisation(const TwoStateChain &c) {
    if (c.frozen())
        throw Degenerate("stationary_polarisation: r+ = r- = 0, dynamics is frozen");
    return (c.r_plus - c.r_minus) / (c.r_plus + c.r_minus);
}

double polarisation_at_R(const TwoStateChain &c, std::uint64_t reps, double p0) {
    if (c.frozen())
        return p0;
    const double p_inf = stationary_polarisation(c);
    return p_inf + (p0 - p_inf) * std::pow(1.0 - c.r_plus - c.r_minus, static_cast<double>(reps));
}

namespace {

double rabi_probability(double g, double delta, double duration, RabiPrefactor prefactor) {
    const double omega = std::sqrt(delta * delta + 4.0 * g * g);
    if (omega == 0.0)
        return 0.0;
    const double amplitude = prefactor == RabiPrefactor::kFullTransfer ? 4.0 : 1.0;
    const double s = std::sin(0.5 * omega * duration);
    return std::clamp(amplitude * (g / omega) * (g / omega) * s * s, 0.0, 1.0);
}

} // namespace

TwoStateChain analytic_rates(const SystemParams &p, double period, int n_p,
                             const AnalyticModel &model) {
    if (n_p < 1)
        throw InvalidArgument("analytic_rates: N_p must be at least 1");
    const double delta = detuning(period, p, Harmonic(3));
    const double duration = n_p * period;
    if (model.order == ModelOrder::kFirst)
        return {rabi_probability(coupling_g(p, Harmonic(3)), delta, duration, model.prefactor),
                0.0};
    const SecondOrderCouplings g = second_order_couplings(p, period, model.g2);
    return {rabi_probability(g.g_plus, delta, duration, model.prefactor),
            rabi_probability(g.g_minus, delta, duration, model.prefactor)};
}

PolarisationTrace analytic_envelope(const SystemParams &p, std::span<const double> periods,
                                    int n_p, const AnalyticModel &model, double p0) {
    PolarisationTrace trace;
    trace.abscissa.assign(periods.begin(), periods.end());
    trace.polarisation.reserve(periods.size());
    for (double period : periods) {
        const TwoStateChain chain = analytic_rates(p, period, n_p, model);
        trace.polarisation.push_back(chain.frozen() ? p0 : stationary_polarisation(chain));
    }
    trace.validate();
    return trace;
}

} // namespace pulsepol

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

#ifndef PULSEPOL_MARKOV_MODEL_HPP
#define PULSEPOL_MARKOV_MODEL_HPP

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pulsepol/polarisation_trace.hpp"
#include "pulsepol/pulsepol_seq.hpp"

namespace pulsepol {

using Distribution = std::vector<double>;

// Column-stochastic D x D matrix: Q(n, m) = p(n at step R | m at step R-1),
// so p' = Q p.
class TransitionMatrix {
  public:
    static constexpr double kTolerance = 1e-12;

    // Throws InvalidArgument unless Q is square, D >= 2, entries >= 0 and
    // every column sums to 1 within 1e-12.
    explicit TransitionMatrix(Eigen::MatrixXd q);

    std::size_t dim() const { return static_cast<std::size_t>(q_.rows()); }
    const Eigen::MatrixXd &matrix() const { return q_; }

  private:
    Eigen::MatrixXd q_;
};

// Q^R p0. Uses the eigen-expansion p = sum_n lambda_n^R c_n v_n when Q is
// diagonalisable with a well-conditioned eigenbasis, otherwise repeated
// squaring.
Distribution chain_evolve(const TransitionMatrix &q, std::span<const double> p0,
                          std::uint64_t reps);

// Same result computed by R explicit matrix-vector products.
Distribution chain_evolve_naive(const TransitionMatrix &q, std::span<const double> p0,
                                std::uint64_t reps);

// Eigenvector of eigenvalue 1 normalised to unit sum. Throws Degenerate when
// more than one eigenvalue lies within 1e-9 of 1 (reducible chain).
Distribution stationary_distribution(const TransitionMatrix &q);

// Two-state nuclear chain over (|up>, |down>).
struct TwoStateChain {
    double r_plus;  // |down> -> |up>
    double r_minus; // |up> -> |down>

    TwoStateChain(double plus, double minus);

    TransitionMatrix matrix() const;
    bool frozen() const { return r_plus + r_minus <= kFrozenSum; }

    static constexpr double kFrozenSum = 1e-15;
};

// (r+ - r-) / (r+ + r-). Throws Degenerate for a frozen chain.
double stationary_polarisation(const TwoStateChain &c);

// P_R = P_inf + (P0 - P_inf)(1 - r+ - r-)^R; a frozen chain keeps P0.
double polarisation_at_R(const TwoStateChain &c, std::uint64_t reps, double p0);

enum class ModelOrder { kFirst, kSecond };

// Amplitude convention for r = A (g / Omega)^2 sin^2(Omega Np T / 2).
//   kFullTransfer: A = 4, the two-level Rabi form reaching 1 on resonance.
//   kQuarterAmplitude: A = 1, peaking at 1/4 on resonance.
enum class RabiPrefactor { kFullTransfer, kQuarterAmplitude };

struct AnalyticModel {
    ModelOrder order = ModelOrder::kSecond;
    RabiPrefactor prefactor = RabiPrefactor::kFullTransfer;
    G2Model g2 = G2Model::kFifthHarmonic;
};

// Transition probabilities of one repetition (Np units of period T) under the
// k = 3 average Hamiltonian. First order: r+ from g3 at Omega = sqrt(d^2 + 4 g3^2),
// r- = 0. Second order: r+ from g+, r- from g-, each with its own Omega.
TwoStateChain analytic_rates(const SystemParams &p, double period, int n_p,
                             const AnalyticModel &model);

// Asymptotic polarisation per period; frozen points report p0.
PolarisationTrace analytic_envelope(const SystemParams &p, std::span<const double> periods,
                                    int n_p, const AnalyticModel &model, double p0 = 0.0);

} // namespace pulsepol

#endif // PULSEPOL_MARKOV_MODEL_HPP

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

#ifndef PULSEPOL_SPIN_CORE_HPP
#define PULSEPOL_SPIN_CORE_HPP

#include <array>
#include <complex>
#include <cstddef>
#include <initializer_list>

#include "pulsepol/errors.hpp"

namespace pulsepol {

using cplx = std::complex<double>;

// Dense row-major complex square matrix of fixed dimension. Only the 2x2
// (single spin) and 4x4 (electron x nucleus) cases are instantiated.
//
// Tensor ordering is electron (x) nucleus everywhere: joint index
// 2 * e + n, with e = 0 the |0> electron level and n = 0 the nuclear |up>.
template <std::size_t N>
class Matrix {
    static_assert(N == 2 || N == 4, "spin spaces are 2- or 4-dimensional");

  public:
    static constexpr std::size_t dim = N;

    Matrix() { data_.fill(cplx{0.0, 0.0}); }

    // Row-major entries; must contain exactly N*N values.
    Matrix(std::initializer_list<cplx> entries);

    static Matrix identity();
    static Matrix zero() { return Matrix{}; }
    static Matrix diagonal(const std::array<cplx, N> &d);

    cplx &operator()(std::size_t r, std::size_t c) { return data_[r * N + c]; }
    const cplx &operator()(std::size_t r, std::size_t c) const { return data_[r * N + c]; }

    const std::array<cplx, N * N> &data() const { return data_; }

    Matrix adjoint() const;
    cplx trace() const;

    Matrix &operator+=(const Matrix &o);
    Matrix &operator-=(const Matrix &o);
    Matrix &operator*=(cplx s);

    friend Matrix operator+(Matrix a, const Matrix &b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix &b) { return a -= b; }
    friend Matrix operator*(Matrix a, cplx s) { return a *= s; }
    friend Matrix operator*(cplx s, Matrix a) { return a *= s; }
    friend Matrix operator*(const Matrix &a, const Matrix &b) {
        Matrix out;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t k = 0; k < N; ++k) {
                const cplx aik = a(i, k);
                if (aik == cplx{})
                    continue;
                for (std::size_t j = 0; j < N; ++j)
                    out(i, j) += aik * b(k, j);
            }
        return out;
    }

  private:
    std::array<cplx, N * N> data_;
};

using Mat2 = Matrix<2>;
using Mat4 = Matrix<4>;

// Largest absolute entry.
template <std::size_t N>
double max_abs(const Matrix<N> &m);

template <std::size_t N>
double hermiticity_defect(const Matrix<N> &m) {
    return max_abs(m - m.adjoint());
}

template <std::size_t N>
double unitarity_defect(const Matrix<N> &u) {
    return max_abs(u.adjoint() * u - Matrix<N>::identity());
}

// Pauli matrices in the {|up>, |down>} (or {|0>, |-1>}) basis.
namespace pauli {
Mat2 x();
Mat2 y();
Mat2 z();
} // namespace pauli

// Spin-1/2 operators (Pauli / 2) and ladder operators.
namespace spin_half {
Mat2 sx();
Mat2 sy();
Mat2 sz();
Mat2 raise(); // |0><1|
Mat2 lower(); // |1><0|
} // namespace spin_half

Mat4 kron(const Mat2 &a, const Mat2 &b);

// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
// rotations. Columns of `vectors` are the eigenvectors; eigenvalues are
// sorted ascending.
template <std::size_t N>
struct HermitianEigen {
    std::array<double, N> values;
    Matrix<N> vectors;
};

template <std::size_t N>
HermitianEigen<N> hermitian_eigen(const Matrix<N> &h, double tol = 1e-13);

// exp(-i h t) for Hermitian h. 2x2 uses the closed Pauli form, 4x4 the
// Jacobi eigendecomposition. Throws InvalidArgument if h is not Hermitian
// to 1e-12 or t < 0.
Mat2 evolve(const Mat2 &h, double t);
Mat4 evolve(const Mat4 &h, double t);

// Rotation exp(-i angle n.sigma/2) of a spin-1/2 about the unit axis n.
Mat2 rotation(double nx, double ny, double nz, double angle);

// Real 3-vector of Pauli expectation values.
struct BlochVector {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const;
    friend bool operator==(const BlochVector &, const BlochVector &) = default;
};

// Density matrix with validated invariants (Hermitian, unit trace, PSD).
template <std::size_t N>
class DensityMatrix {
  public:
    static constexpr double kTolerance = 1e-12;

    // Validates; throws InvariantViolation.
    explicit DensityMatrix(const Matrix<N> &m);

    static DensityMatrix maximally_mixed();
    // |i><i| in the computational basis.
    static DensityMatrix basis_state(std::size_t i);

    const Matrix<N> &matrix() const { return m_; }

  private:
    Matrix<N> m_;
};

using Rho2 = DensityMatrix<2>;
using Rho4 = DensityMatrix<4>;

// Names the first violated density-matrix invariant, or nullptr when m is a
// valid state at tolerance tol.
template <std::size_t N>
const char *density_defect(const Matrix<N> &m, double tol = 1e-12);

Rho2 partial_trace_electron(const Rho4 &rho);
Rho2 partial_trace_nucleus(const Rho4 &rho);
Rho4 reinitialize_electron(const Rho4 &rho, const Rho2 &electron_state);

// Tr(rho sigma_z); |up> is the +1 eigenstate.
double polarisation(const Rho2 &rho_n);

BlochVector to_bloch(const Rho2 &rho);
Rho2 from_bloch(const BlochVector &b);

} // namespace pulsepol

#endif // PULSEPOL_SPIN_CORE_HPP

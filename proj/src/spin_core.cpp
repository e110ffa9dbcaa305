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

#include "pulsepol/spin_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace pulsepol {

namespace {

constexpr cplx I{0.0, 1.0};

} // namespace

//----------------------------------------------------------------------------
// Matrix
//----------------------------------------------------------------------------

template <std::size_t N>
Matrix<N>::Matrix(std::initializer_list<cplx> entries) {
    if (entries.size() != N * N)
        throw InvalidArgument("Matrix: expected " + std::to_string(N * N) + " entries, got " +
                              std::to_string(entries.size()));
    std::copy(entries.begin(), entries.end(), data_.begin());
}

template <std::size_t N>
Matrix<N> Matrix<N>::identity() {
    Matrix m;
    for (std::size_t i = 0; i < N; ++i)
        m(i, i) = 1.0;
    return m;
}

template <std::size_t N>
Matrix<N> Matrix<N>::diagonal(const std::array<cplx, N> &d) {
    Matrix m;
    for (std::size_t i = 0; i < N; ++i)
        m(i, i) = d[i];
    return m;
}

template <std::size_t N>
Matrix<N> Matrix<N>::adjoint() const {
    Matrix m;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j)
            m(i, j) = std::conj((*this)(j, i));
    return m;
}

template <std::size_t N>
cplx Matrix<N>::trace() const {
    cplx t{};
    for (std::size_t i = 0; i < N; ++i)
        t += (*this)(i, i);
    return t;
}

template <std::size_t N>
Matrix<N> &Matrix<N>::operator+=(const Matrix &o) {
    for (std::size_t i = 0; i < N * N; ++i)
        data_[i] += o.data_[i];
    return *this;
}

template <std::size_t N>
Matrix<N> &Matrix<N>::operator-=(const Matrix &o) {
    for (std::size_t i = 0; i < N * N; ++i)
        data_[i] -= o.data_[i];
    return *this;
}

template <std::size_t N>
Matrix<N> &Matrix<N>::operator*=(cplx s) {
    for (auto &v : data_)
        v *= s;
    return *this;
}

template <std::size_t N>
double max_abs(const Matrix<N> &m) {
    double best = 0.0;
    for (const auto &v : m.data())
        best = std::max(best, std::abs(v));
    return best;
}

template class Matrix<2>;
template class Matrix<4>;
template double max_abs(const Matrix<2> &);
template double max_abs(const Matrix<4> &);

//----------------------------------------------------------------------------
// Spin operators
//----------------------------------------------------------------------------

namespace pauli {
Mat2 x() { return Mat2{0.0, 1.0, 1.0, 0.0}; }
Mat2 y() { return Mat2{0.0, -I, I, 0.0}; }
Mat2 z() { return Mat2{1.0, 0.0, 0.0, -1.0}; }
} // namespace pauli

namespace spin_half {
Mat2 sx() { return 0.5 * pauli::x(); }
Mat2 sy() { return 0.5 * pauli::y(); }
Mat2 sz() { return 0.5 * pauli::z(); }
Mat2 raise() { return Mat2{0.0, 1.0, 0.0, 0.0}; }
Mat2 lower() { return Mat2{0.0, 0.0, 1.0, 0.0}; }
} // namespace spin_half

Mat4 kron(const Mat2 &a, const Mat2 &b) {
    Mat4 out;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 2; ++k)
                for (std::size_t l = 0; l < 2; ++l)
                    out(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
    return out;
}

//----------------------------------------------------------------------------
// Hermitian eigensolver
//----------------------------------------------------------------------------

template <std::size_t N>
HermitianEigen<N> hermitian_eigen(const Matrix<N> &h, double tol) {
    Matrix<N> a = h;
    Matrix<N> v = Matrix<N>::identity();

    auto off_norm = [&a] {
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j)
                if (i != j)
                    s += std::norm(a(i, j));
        return std::sqrt(s);
    };
    double scale = 0.0;
    for (const auto &x : a.data())
        scale += std::norm(x);
    scale = std::max(std::sqrt(scale), 1e-300);

    constexpr int kMaxSweeps = 64;
    for (int sweep = 0; sweep < kMaxSweeps && off_norm() > tol * scale * 1e-2; ++sweep) {
        for (std::size_t p = 0; p + 1 < N; ++p) {
            for (std::size_t q = p + 1; q < N; ++q) {
                const double b = std::abs(a(p, q));
                if (b < 1e-300)
                    continue;
                // Phase-rotate q so that a(p,q) is real, then apply a real
                // Givens rotation zeroing it.
                const cplx phase = a(p, q) / b;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = 0.5 * std::atan2(2.0 * b, app - aqq);
                const double c = std::cos(theta);
                const double s = std::sin(theta);

                // J has columns e_p * c + e_q * s * conj(phase),
                //                  -e_p * s + e_q * c * conj(phase).
                const cplx jpp = c, jpq = -s;
                const cplx jqp = s * std::conj(phase), jqq = c * std::conj(phase);

                // a <- a J
                for (std::size_t r = 0; r < N; ++r) {
                    const cplx arp = a(r, p), arq = a(r, q);
                    a(r, p) = arp * jpp + arq * jqp;
                    a(r, q) = arp * jpq + arq * jqq;
                }
                // a <- J^dagger a
                for (std::size_t col = 0; col < N; ++col) {
                    const cplx apc = a(p, col), aqc = a(q, col);
                    a(p, col) = std::conj(jpp) * apc + std::conj(jqp) * aqc;
                    a(q, col) = std::conj(jpq) * apc + std::conj(jqq) * aqc;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t r = 0; r < N; ++r) {
                    const cplx vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = vrp * jpp + vrq * jqp;
                    v(r, q) = vrp * jpq + vrq * jqq;
                }
            }
        }
    }

    std::array<std::size_t, N> order;
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&a](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

    HermitianEigen<N> out;
    for (std::size_t k = 0; k < N; ++k) {
        out.values[k] = a(order[k], order[k]).real();
        for (std::size_t r = 0; r < N; ++r)
            out.vectors(r, k) = v(r, order[k]);
    }
    return out;
}

template HermitianEigen<2> hermitian_eigen(const Matrix<2> &, double);
template HermitianEigen<4> hermitian_eigen(const Matrix<4> &, double);

//----------------------------------------------------------------------------
// Time evolution
//----------------------------------------------------------------------------

namespace {

template <std::size_t N>
void check_evolve_args(const Matrix<N> &h, double t) {
    if (hermiticity_defect(h) >= 1e-12)
        throw InvalidArgument("evolve: Hamiltonian is not Hermitian");
    if (!(t >= 0.0) || !std::isfinite(t))
        throw InvalidArgument("evolve: duration must be finite and non-negative");
}

} // namespace

Mat2 evolve(const Mat2 &h, double t) {
    check_evolve_args(h, t);
    // h = a0 I + a.sigma
    const double a0 = 0.5 * (h(0, 0).real() + h(1, 1).real());
    const double ax = h(0, 1).real();
    const double ay = -h(0, 1).imag();
    const double az = 0.5 * (h(0, 0).real() - h(1, 1).real());
    const double norm = std::sqrt(ax * ax + ay * ay + az * az);
    const cplx global = std::exp(-I * a0 * t);
    if (norm * t == 0.0)
        return global * Mat2::identity();
    return global * rotation(ax / norm, ay / norm, az / norm, 2.0 * norm * t);
}

Mat4 evolve(const Mat4 &h, double t) {
    check_evolve_args(h, t);
    const auto eig = hermitian_eigen(h);
    std::array<cplx, 4> phases;
    for (std::size_t k = 0; k < 4; ++k)
        phases[k] = std::exp(-I * eig.values[k] * t);
    return eig.vectors * Mat4::diagonal(phases) * eig.vectors.adjoint();
}

Mat2 rotation(double nx, double ny, double nz, double angle) {
    const double c = std::cos(0.5 * angle);
    const double s = std::sin(0.5 * angle);
    return Mat2{cplx{c, -s * nz}, cplx{-s * ny, -s * nx},  //
                cplx{s * ny, -s * nx}, cplx{c, s * nz}};
}

//----------------------------------------------------------------------------
// States
//----------------------------------------------------------------------------

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

template <std::size_t N>
const char *density_defect(const Matrix<N> &m, double tol) {
    for (const auto &v : m.data())
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            return "non-finite entry";
    if (hermiticity_defect(m) >= tol)
        return "not Hermitian";
    if (std::abs(m.trace() - 1.0) >= tol)
        return "trace differs from 1";
    const auto eig = hermitian_eigen(m);
    if (eig.values[0] < -tol)
        return "negative eigenvalue";
    return nullptr;
}

template const char *density_defect(const Matrix<2> &, double);
template const char *density_defect(const Matrix<4> &, double);

template <std::size_t N>
DensityMatrix<N>::DensityMatrix(const Matrix<N> &m) : m_(m) {
    if (const char *why = density_defect(m, kTolerance))
        throw InvariantViolation(std::string("DensityMatrix: ") + why);
}

template <std::size_t N>
DensityMatrix<N> DensityMatrix<N>::maximally_mixed() {
    return DensityMatrix(Matrix<N>::identity() * cplx{1.0 / N});
}

template <std::size_t N>
DensityMatrix<N> DensityMatrix<N>::basis_state(std::size_t i) {
    if (i >= N)
        throw InvalidArgument("DensityMatrix::basis_state: index out of range");
    Matrix<N> m;
    m(i, i) = 1.0;
    return DensityMatrix(m);
}

template class DensityMatrix<2>;
template class DensityMatrix<4>;

Rho2 partial_trace_electron(const Rho4 &rho) {
    const Mat4 &m = rho.matrix();
    Mat2 out;
    for (std::size_t n = 0; n < 2; ++n)
        for (std::size_t k = 0; k < 2; ++k)
            out(n, k) = m(n, k) + m(2 + n, 2 + k);
    return Rho2(out);
}

Rho2 partial_trace_nucleus(const Rho4 &rho) {
    const Mat4 &m = rho.matrix();
    Mat2 out;
    for (std::size_t e = 0; e < 2; ++e)
        for (std::size_t f = 0; f < 2; ++f)
            out(e, f) = m(2 * e, 2 * f) + m(2 * e + 1, 2 * f + 1);
    return Rho2(out);
}

Rho4 reinitialize_electron(const Rho4 &rho, const Rho2 &electron_state) {
    return Rho4(kron(electron_state.matrix(), partial_trace_electron(rho).matrix()));
}

double polarisation(const Rho2 &rho_n) { return (rho_n.matrix() * pauli::z()).trace().real(); }

BlochVector to_bloch(const Rho2 &rho) {
    const Mat2 &m = rho.matrix();
    return {2.0 * m(0, 1).real(), -2.0 * m(0, 1).imag(), (m(0, 0) - m(1, 1)).real()};
}

Rho2 from_bloch(const BlochVector &b) {
    if (b.norm() > 1.0 + 1e-10)
        throw InvariantViolation("from_bloch: Bloch vector outside the unit ball");
    return Rho2(Mat2{cplx{0.5 * (1.0 + b.z)}, cplx{0.5 * b.x, -0.5 * b.y},  //
                     cplx{0.5 * b.x, 0.5 * b.y}, cplx{0.5 * (1.0 - b.z)}});
}

} // namespace pulsepol

#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "biphoton/errors.hpp"
#include "biphoton/two_qubit.hpp"

namespace biphoton {

// rho_tilde = (sy (x) sy) conj(rho) (sy (x) sy). In the fixed basis this is
// the entrywise conjugate reversed along both axes with sign pattern
// s_i s_j, s = (-1, 1, 1, -1).
inline Eigen::Matrix4cd spin_flipped(const TwoQubitState& rho) {
    static constexpr std::array<double, 4> sign = {-1.0, 1.0, 1.0, -1.0};
    Eigen::Matrix4cd out;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            out(i, j) = sign[i] * sign[j] * std::conj(rho(3 - i, 3 - j));
    return out;
}

struct ConcurrenceResult {
    double value = 0.0;               // max(0, l1 - l2 - l3 - l4)
    std::array<double, 4> lambdas{};  // descending, all >= 0
};

// Wootters concurrence. The lambdas are the square roots of the eigenvalues
// of rho * rho_tilde, obtained through the all-Hermitian form
// sqrt(rho) rho_tilde sqrt(rho) (similar matrix, same spectrum), which keeps
// every eigenproblem self-adjoint and the repeated-zero eigenvalues of pure
// inputs stable. Spectrum dust below 1e-12 is rounding of the matrix products
// and is clamped before the square root.
inline ConcurrenceResult concurrence(const TwoQubitState& rho) {
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
        throw NumericalFailure(
            "concurrence input is not Hermitian; rho*rho_tilde spectrum would have "
            "imaginary parts beyond 1e-8");

    const TwoQubitState sym = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<TwoQubitState> es_rho(sym);
    Eigen::Vector4d vals = es_rho.eigenvalues();
    for (int i = 0; i < 4; ++i) {
        if (vals(i) < -1e-10)
            throw NumericalFailure("concurrence input has eigenvalue below -1e-10");
        vals(i) = std::sqrt(std::max(0.0, vals(i)));
    }
    const Eigen::Matrix4cd sqrt_rho =
        es_rho.eigenvectors() *
        vals.asDiagonal().toDenseMatrix().cast<std::complex<double>>() *
        es_rho.eigenvectors().adjoint();

    Eigen::Matrix4cd product = sqrt_rho * spin_flipped(sym) * sqrt_rho;
    product = 0.5 * (product + product.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<TwoQubitState> es(product);

    ConcurrenceResult result;
    for (int i = 0; i < 4; ++i) {
        double mu = es.eigenvalues()(i);
        if (mu < -1e-10)
            throw NumericalFailure("rho*rho_tilde eigenvalue below -1e-10");
        if (mu < 1e-12) mu = 0.0;
        result.lambdas[i] = std::sqrt(mu);
    }
    std::sort(result.lambdas.begin(), result.lambdas.end(), std::greater<>());
    const double c = result.lambdas[0] - result.lambdas[1] - result.lambdas[2] -
                     result.lambdas[3];
    result.value = std::clamp(c, 0.0, 1.0);
    return result;
}

// Pure-state shortcut: C = 2 |c1 c4 - c2 c3| for normalized amplitudes.
inline double concurrence_pure(const Eigen::Vector4cd& amplitudes) {
    if (std::abs(amplitudes.squaredNorm() - 1.0) > 1e-10)
        throw NotNormalized("pure-state amplitudes must have unit norm");
    return 2.0 * std::abs(amplitudes(0) * amplitudes(3) - amplitudes(1) * amplitudes(2));
}

// Tr(rho^2), in [1/4, 1] for valid states.
inline double purity(const TwoQubitState& rho) {
    return (rho * rho).trace().real();
}

} // namespace biphoton

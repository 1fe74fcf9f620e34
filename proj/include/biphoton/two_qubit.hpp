#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "biphoton/errors.hpp"

namespace biphoton {

// 4x4 density matrix over {uu, ud, du, dd}. Hermitian, trace one, PSD up to
// numerical dust.
using TwoQubitState = Eigen::Matrix4cd;

// |++> = (u + d)(u + d)/2: every entry 1/4.
inline TwoQubitState initial_state() {
    return TwoQubitState::Constant(std::complex<double>(0.25, 0.0));
}

// Outer product of a (normalized) amplitude vector.
inline TwoQubitState pure_state(const Eigen::Vector4cd& amplitudes) {
    return amplitudes * amplitudes.adjoint();
}

// (X (x) X) rho (X (x) X): simultaneous up/down swap on both qubits, i.e.
// matrix reversal along both axes.
inline TwoQubitState bit_flip(const TwoQubitState& rho) {
    return rho.reverse();
}

// Post-measurement hygiene: symmetrize, renormalize the trace, and clamp
// negative eigenvalue dust (tolerated down to -1e-10). The clamping
// reconstruction only runs when an eigenvalue is genuinely negative beyond
// working precision; rebuilding from the eigenbasis unconditionally would
// smear absolute rounding into the small coherences that later detection
// events amplify back to O(1).
inline TwoQubitState restore_physical(const TwoQubitState& rho) {
    TwoQubitState sym = 0.5 * (rho + rho.adjoint());
    const double trace = sym.trace().real();
    if (!(trace > 0.0))
        throw NumericalFailure("density matrix trace vanished");
    sym /= trace;

    Eigen::SelfAdjointEigenSolver<TwoQubitState> es;
    es.compute(sym, Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig >= -1e-12) return sym;
    if (min_eig < -1e-10)
        throw NumericalFailure("density matrix eigenvalue below -1e-10");

    es.compute(sym);
    Eigen::Vector4d vals = es.eigenvalues().cwiseMax(0.0);
    const double total = vals.sum();
    if (total <= 0.0)
        throw NumericalFailure("density matrix has vanished under clamping");
    vals /= total;
    return es.eigenvectors() * vals.asDiagonal().toDenseMatrix().cast<std::complex<double>>() *
           es.eigenvectors().adjoint();
}

inline bool is_valid_state(const TwoQubitState& rho, double tol = 1e-12,
                           double psd_tol = 1e-10) {
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
    if (std::abs(rho.trace().real() - 1.0) > tol || std::abs(rho.trace().imag()) > tol)
        return false;
    Eigen::SelfAdjointEigenSolver<TwoQubitState> es(rho);
    return es.eigenvalues().minCoeff() >= -psd_tol;
}

} // namespace biphoton

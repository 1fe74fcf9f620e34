#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "biphoton/concurrence.hpp"
#include "oracles.hpp"

using namespace biphoton;
using Catch::Matchers::WithinAbs;

namespace {

Eigen::Vector4cd ket(double c1, double c2, double c3, double c4) {
    return Eigen::Vector4cd{complexd{c1, 0.0}, complexd{c2, 0.0}, complexd{c3, 0.0},
                            complexd{c4, 0.0}};
}

TwoQubitState werner(double p) {
    const Eigen::Vector4cd singlet = ket(0.0, M_SQRT1_2, -M_SQRT1_2, 0.0);
    return p * pure_state(singlet) + (1.0 - p) * 0.25 * TwoQubitState::Identity();
}

} // namespace

TEST_CASE("spin flip fixes the singlet and swaps the corners") {
    const TwoQubitState singlet = pure_state(ket(0.0, M_SQRT1_2, -M_SQRT1_2, 0.0));
    CHECK_THAT((spin_flipped(singlet) - singlet).cwiseAbs().maxCoeff(), WithinAbs(0.0, 1e-15));

    TwoQubitState uu = TwoQubitState::Zero();
    uu(0, 0) = 1.0;
    TwoQubitState dd = TwoQubitState::Zero();
    dd(3, 3) = 1.0;
    CHECK_THAT((spin_flipped(uu) - dd).cwiseAbs().maxCoeff(), WithinAbs(0.0, 0.0));

    const TwoQubitState mixed = 0.25 * TwoQubitState::Identity();
    CHECK_THAT((spin_flipped(mixed) - mixed).cwiseAbs().maxCoeff(), WithinAbs(0.0, 0.0));
}

TEST_CASE("maximally entangled and separable reference points") {
    const TwoQubitState phi_minus = pure_state(ket(M_SQRT1_2, 0.0, 0.0, -M_SQRT1_2));
    CHECK_THAT(concurrence(phi_minus).value, WithinAbs(1.0, 1e-12));

    CHECK_THAT(concurrence(0.25 * TwoQubitState::Identity()).value, WithinAbs(0.0, 1e-12));
}

TEST_CASE("Werner states follow the closed form") {
    for (double p : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
        const double expected = std::max(0.0, (3.0 * p - 1.0) / 2.0);
        CHECK_THAT(concurrence(werner(p)).value, WithinAbs(expected, 1e-10));
    }
}

TEST_CASE("lambdas come out sorted and reproduce the spectrum oracle") {
    oracles::RandomSource random(0xCC01u);
    for (int i = 0; i < 300; ++i) {
        const TwoQubitState rho = random.density_matrix();
        const ConcurrenceResult result = concurrence(rho);
        CHECK(result.value >= 0.0);
        CHECK(result.value <= 1.0);
        for (int k = 0; k + 1 < 4; ++k) REQUIRE(result.lambdas[k] >= result.lambdas[k + 1]);

        // General complex eigensolver on rho*rho_tilde as an oracle.
        const Eigen::Vector4cd eigs = oracles::rho_rho_tilde_eigenvalues(rho);
        std::array<double, 4> expected{};
        for (int k = 0; k < 4; ++k) {
            REQUIRE(std::abs(eigs(k).imag()) <= 1e-8);
            expected[static_cast<std::size_t>(k)] =
                std::sqrt(std::max(0.0, eigs(k).real()));
        }
        std::sort(expected.begin(), expected.end(), std::greater<>());
        for (int k = 0; k < 4; ++k)
            REQUIRE_THAT(result.lambdas[static_cast<std::size_t>(k)],
                         WithinAbs(expected[static_cast<std::size_t>(k)], 1e-7));
    }
}

TEST_CASE("pure-state formula reference values") {
    CHECK(concurrence_pure(ket(1.0, 0.0, 0.0, 0.0)) == 0.0);
    CHECK_THAT(concurrence_pure(ket(0.0, M_SQRT1_2, -M_SQRT1_2, 0.0)), WithinAbs(1.0, 1e-12));
    CHECK_THROWS_AS(concurrence_pure(ket(1.0, 1.0, 0.0, 0.0)), NotNormalized);
}

TEST_CASE("pure and mixed formulas agree on random pure states") {
    oracles::RandomSource random(0xCC02u);
    for (int i = 0; i < 1000; ++i) {
        const Eigen::Vector4cd amps = random.pure_amplitudes();
        REQUIRE_THAT(concurrence(pure_state(amps)).value,
                     WithinAbs(concurrence_pure(amps), 1e-10));
    }
}

TEST_CASE("concurrence is invariant under local phase rotations") {
    oracles::RandomSource random(0xCC03u);
    for (int i = 0; i < 300; ++i) {
        const TwoQubitState rho = random.density_matrix();
        const double base = concurrence(rho).value;

        const double alpha = random.uniform(0.0, 2.0 * M_PI);
        const double beta = random.uniform(0.0, 2.0 * M_PI);
        Eigen::Vector4cd phases{complexd{1.0, 0.0}, std::polar(1.0, beta),
                                std::polar(1.0, alpha), std::polar(1.0, alpha + beta)};
        const Eigen::Matrix4cd u = phases.asDiagonal();
        REQUIRE_THAT(concurrence((u * rho * u.adjoint()).eval()).value,
                     WithinAbs(base, 1e-10));
        REQUIRE_THAT(concurrence(bit_flip(rho)).value, WithinAbs(base, 1e-10));
    }
}

TEST_CASE("non-Hermitian input is a numerical failure") {
    TwoQubitState bad = initial_state();
    bad(0, 1) += complexd{0.0, 1e-3};
    CHECK_THROWS_AS(concurrence(bad), NumericalFailure);
}

TEST_CASE("purity reference points") {
    oracles::RandomSource random(0xCC04u);
    CHECK_THAT(purity(pure_state(random.pure_amplitudes())), WithinAbs(1.0, 1e-12));
    CHECK_THAT(purity(0.25 * TwoQubitState::Identity()), WithinAbs(0.25, 1e-15));

    // p-mixture of two orthogonal pure states: Tr rho^2 = p^2 + (1-p)^2.
    const double p = 0.3;
    TwoQubitState mix = p * pure_state(ket(1.0, 0.0, 0.0, 0.0)) +
                        (1.0 - p) * pure_state(ket(0.0, 1.0, 0.0, 0.0));
    CHECK_THAT(purity(mix), WithinAbs(p * p + (1.0 - p) * (1.0 - p), 1e-12));
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "biphoton/fock_polynomial.hpp"
#include "oracles.hpp"

using namespace biphoton;
using Catch::Matchers::WithinAbs;

namespace {

ModeMonomial mono(int a, int b, int r1 = 0, int r2 = 0) {
    return ModeMonomial{{static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b),
                         static_cast<std::uint8_t>(r1), static_cast<std::uint8_t>(r2)}};
}

complexd coeff_of(const BranchPolynomial& poly, SpinBranch s, const ModeMonomial& m) {
    const auto& terms = poly.branch(s);
    const auto it = terms.find(m);
    return it == terms.end() ? complexd{} : it->second;
}

// Single-branch polynomial for probing the linear maps in isolation.
BranchPolynomial single(const ModeMonomial& m, complexd c = {1.0, 0.0}) {
    BranchPolynomial poly;
    for (SpinBranch s : kSpinBranches) poly.add(s, m, c);
    return poly;
}

} // namespace

TEST_CASE("probe input normalization") {
    const BranchPolynomial one_one = probe_input(1, 1);
    for (SpinBranch s : kSpinBranches)
        CHECK(coeff_of(one_one, s, mono(1, 1)) == complexd{1.0, 0.0});

    CHECK_THAT(std::abs(coeff_of(probe_input(2, 2), SpinBranch::UU, mono(2, 2)) - 0.5),
               WithinAbs(0.0, 1e-15));
    CHECK_THAT(std::abs(coeff_of(probe_input(2, 0), SpinBranch::UU, mono(2, 0)) -
                        1.0 / std::sqrt(2.0)),
               WithinAbs(0.0, 1e-15));

    CHECK_THROWS_AS(probe_input(0, 0), ZeroPhotons);
    CHECK_THROWS_AS(probe_input(-1, 2), InvalidConfig);
}

TEST_CASE("beamsplitter on the biphoton monomial") {
    const BranchPolynomial out = apply_beamsplitter(single(mono(1, 1)));
    // a b -> (a^2 - b^2)/2; the cross term cancels exactly.
    CHECK_THAT(std::abs(coeff_of(out, SpinBranch::UU, mono(2, 0)) - 0.5), WithinAbs(0.0, 1e-15));
    CHECK_THAT(std::abs(coeff_of(out, SpinBranch::UU, mono(0, 2)) + 0.5), WithinAbs(0.0, 1e-15));
    CHECK(out.branch(SpinBranch::UU).count(mono(1, 1)) == 0);
}

TEST_CASE("beamsplitter on a squared mode") {
    const BranchPolynomial out = apply_beamsplitter(single(mono(2, 0)));
    CHECK_THAT(std::abs(coeff_of(out, SpinBranch::UU, mono(2, 0)) - 0.5), WithinAbs(0.0, 1e-15));
    CHECK_THAT(std::abs(coeff_of(out, SpinBranch::UU, mono(1, 1)) - 1.0), WithinAbs(0.0, 1e-15));
    CHECK_THAT(std::abs(coeff_of(out, SpinBranch::UU, mono(0, 2)) - 0.5), WithinAbs(0.0, 1e-15));
}

TEST_CASE("beamsplitter turns the antisymmetric pair into a coincidence") {
    BranchPolynomial in;
    for (SpinBranch s : kSpinBranches) {
        in.add(s, mono(2, 0), complexd{1.0, 0.0});
        in.add(s, mono(0, 2), complexd{-1.0, 0.0});
    }
    const BranchPolynomial out = apply_beamsplitter(in);
    CHECK_THAT(std::abs(coeff_of(out, SpinBranch::DD, mono(1, 1)) - 2.0), WithinAbs(0.0, 1e-15));
    CHECK(out.branch(SpinBranch::DD).size() == 1);
}

TEST_CASE("beamsplitter is an involution on all small monomials") {
    for (int j = 0; j <= 4; ++j)
        for (int k = 0; j + k <= 4; ++k)
            for (int l1 = 0; l1 <= 1; ++l1)
                for (int l2 = 0; l2 <= 1; ++l2) {
                    if (j + k == 0) continue;
                    const ModeMonomial m = mono(j, k, l1, l2);
                    const BranchPolynomial twice =
                        apply_beamsplitter(apply_beamsplitter(single(m)));
                    REQUIRE(twice.branch(SpinBranch::UU).size() == 1);
                    REQUIRE_THAT(std::abs(coeff_of(twice, SpinBranch::UU, m) - 1.0),
                                 WithinAbs(0.0, 1e-12));
                }
}

TEST_CASE("conditional scattering matches the branch transformation rules") {
    const EmitterPair lossless = pair_from_ratios(3.0, 1.0);
    const double omega = 0.4;
    const complexd t1 = transmission_amplitude(lossless.emitter1, omega);

    const BranchPolynomial out = apply_conditional_scatter(single(mono(2, 0)), lossless, omega);
    CHECK_THAT(std::abs(coeff_of(out, SpinBranch::UD, mono(2, 0)) - t1 * t1),
               WithinAbs(0.0, 1e-15));
    // Down-coupled branches leave the photons unchanged.
    CHECK(coeff_of(out, SpinBranch::DU, mono(2, 0)) == complexd{1.0, 0.0});
    CHECK(coeff_of(out, SpinBranch::DD, mono(2, 0)) == complexd{1.0, 0.0});
}

TEST_CASE("lossy scattering expands into the reservoir binomial") {
    const EmitterPair pair = pair_from_ratios(3.0, 1.0, 0.8);
    const double omega = 0.7;
    const ScatterAmplitudes amp = scatter_amplitudes(pair.emitter1, omega);

    const BranchPolynomial out = apply_conditional_scatter(single(mono(2, 0)), pair, omega);
    CHECK_THAT(std::abs(coeff_of(out, SpinBranch::UD, mono(2, 0)) - amp.t * amp.t),
               WithinAbs(0.0, 1e-15));
    CHECK_THAT(std::abs(coeff_of(out, SpinBranch::UD, mono(1, 0, 1)) - 2.0 * amp.t * amp.t_e),
               WithinAbs(0.0, 1e-15));
    CHECK_THAT(std::abs(coeff_of(out, SpinBranch::UD, mono(0, 0, 2)) - amp.t_e * amp.t_e),
               WithinAbs(0.0, 1e-15));
    // Emitter 2 is down in UD, so arm b would be untouched; emitter 1 is down
    // in DD, so nothing scatters at all.
    CHECK(out.branch(SpinBranch::DD).size() == 1);
}

TEST_CASE("every stage conserves the photon number per monomial") {
    const EmitterPair pair = pair_from_ratios(2.0, 3.0, 0.85);
    const double omega = 1.3;
    BranchPolynomial state = probe_input(2, 2);
    const int total = 4;

    auto check_totals = [&](const BranchPolynomial& poly) {
        for (SpinBranch s : kSpinBranches)
            for (const auto& [m, c] : poly.branch(s)) REQUIRE(m.total() == total);
    };
    state = apply_beamsplitter(state);
    check_totals(state);
    state = apply_conditional_scatter(state, pair, omega);
    check_totals(state);
    state = apply_beamsplitter(state);
    check_totals(state);
}

TEST_CASE("stage unitarity with explicit loss modes") {
    oracles::RandomSource random(0xF0C0u);
    for (int i = 0; i < 50; ++i) {
        const EmitterPair pair{
            Emitter{random.uniform(-3.0, 3.0), random.uniform(0.3, 2.0),
                    random.uniform(0.0, 0.5)},
            Emitter{random.uniform(-3.0, 3.0), random.uniform(0.3, 2.0),
                    random.uniform(0.0, 0.5)}};
        const double omega = random.uniform(-4.0, 4.0);
        const int n_a = 1 + (i % 2);
        const int n_b = n_a;

        BranchPolynomial state = probe_input(n_a, n_b);
        REQUIRE_THAT(state.total_norm_sq(), WithinAbs(1.0, 1e-12));
        state = apply_beamsplitter(state);
        REQUIRE_THAT(state.total_norm_sq(), WithinAbs(1.0, 1e-12));
        state = apply_conditional_scatter(state, pair, omega);
        REQUIRE_THAT(state.total_norm_sq(), WithinAbs(1.0, 1e-12));
        state = apply_beamsplitter(state);
        REQUIRE_THAT(state.total_norm_sq(), WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("pipeline agrees with the per-photon path expansion") {
    oracles::RandomSource random(0xF0C1u);
    for (int i = 0; i < 20; ++i) {
        const EmitterPair pair{
            Emitter{random.uniform(-2.0, 2.0), random.uniform(0.3, 2.0),
                    random.uniform(0.0, 0.4)},
            Emitter{random.uniform(-2.0, 2.0), random.uniform(0.3, 2.0),
                    random.uniform(0.0, 0.4)}};
        const double omega = random.uniform(-3.0, 3.0);
        const int n_a = (i % 2 == 0) ? 1 : 2;
        const int n_b = n_a;

        const BranchPolynomial engine = detection_pipeline(n_a, n_b, pair, omega);
        for (SpinBranch s : kSpinBranches) {
            const auto oracle = oracles::path_expansion(n_a, n_b, s, pair, omega);
            for (const auto& [m, c] : oracle)
                REQUIRE_THAT(std::abs(coeff_of(engine, s, m) - c), WithinAbs(0.0, 1e-12));
            for (const auto& [m, c] : engine.branch(s))
                if (std::abs(c) > 1e-13) REQUIRE(oracle.count(m) == 1);
        }
    }
}

#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <complex>
#include <cstdint>
#include <map>

#include "biphoton/emitter.hpp"
#include "biphoton/errors.hpp"

namespace biphoton {

// Two-qubit computational basis, ordered as the density-matrix rows/columns.
enum class SpinBranch : int { UU = 0, UD = 1, DU = 2, DD = 3 };

inline constexpr std::array<SpinBranch, 4> kSpinBranches = {
    SpinBranch::UU, SpinBranch::UD, SpinBranch::DU, SpinBranch::DD};

inline bool emitter1_up(SpinBranch s) { return s == SpinBranch::UU || s == SpinBranch::UD; }
inline bool emitter2_up(SpinBranch s) { return s == SpinBranch::UU || s == SpinBranch::DU; }

// Photon counts of a creation-operator monomial over the four optical modes:
// guided output arms a and b, and one loss reservoir per emitter.
struct ModeMonomial {
    std::array<std::uint8_t, 4> n{};  // a, b, r1, r2

    int guided_a() const { return n[0]; }
    int guided_b() const { return n[1]; }
    int reservoir1() const { return n[2]; }
    int reservoir2() const { return n[3]; }
    int total() const { return n[0] + n[1] + n[2] + n[3]; }

    auto operator<=>(const ModeMonomial&) const = default;
};

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// <0| x x^dag |0> for the monomial x = a^j b^k r1^l1 r2^l2.
inline double monomial_weight(const ModeMonomial& m) {
    return factorial(m.n[0]) * factorial(m.n[1]) * factorial(m.n[2]) * factorial(m.n[3]);
}

inline double binomial(int n, int k) {
    double b = 1.0;
    for (int i = 0; i < k; ++i) b = b * (n - i) / (i + 1);
    return b;
}

// Exact few-photon optical state conditioned on the spin branch: for each
// branch, a sparse complex polynomial over creation-operator monomials.
// Coefficients multiply raw monomials (not normalized Fock kets), so the
// branch norm carries the factorial weight of each monomial.
class BranchPolynomial {
public:
    using TermMap = std::map<ModeMonomial, complexd>;

    TermMap& branch(SpinBranch s) { return branches_[static_cast<int>(s)]; }
    const TermMap& branch(SpinBranch s) const { return branches_[static_cast<int>(s)]; }

    void add(SpinBranch s, const ModeMonomial& m, complexd coeff) {
        branch(s)[m] += coeff;
    }

    // Numerical dust below this magnitude is dropped after every stage.
    static constexpr double kPruneEps = 1e-15;

    void prune() {
        for (auto& terms : branches_)
            for (auto it = terms.begin(); it != terms.end();)
                it = (std::abs(it->second) < kPruneEps) ? terms.erase(it) : std::next(it);
    }

    double branch_norm_sq(SpinBranch s) const {
        double sum = 0.0;
        for (const auto& [mono, coeff] : branch(s))
            sum += std::norm(coeff) * monomial_weight(mono);
        return sum;
    }

    // Norm with uniform 1/4 spin weight; 1 after every unitary stage.
    double total_norm_sq() const {
        double sum = 0.0;
        for (SpinBranch s : kSpinBranches) sum += branch_norm_sq(s);
        return 0.25 * sum;
    }

private:
    std::array<TermMap, 4> branches_{};
};

// (a^dag)^na (b^dag)^nb |0> / sqrt(na! nb!), replicated across the four spin
// branches with unit branch amplitude; the spin weighting enters later through
// the density-matrix kernel contraction.
inline BranchPolynomial probe_input(int n_a, int n_b) {
    if (n_a < 0 || n_b < 0)
        throw InvalidConfig("photon numbers must be non-negative");
    if (n_a + n_b == 0)
        throw ZeroPhotons("probe needs at least one photon");
    ModeMonomial mono{{static_cast<std::uint8_t>(n_a), static_cast<std::uint8_t>(n_b), 0, 0}};
    const double coeff = 1.0 / std::sqrt(factorial(n_a) * factorial(n_b));
    BranchPolynomial poly;
    for (SpinBranch s : kSpinBranches) poly.add(s, mono, coeff);
    return poly;
}

// 50:50 beamsplitter, a -> (a + b)/sqrt(2), b -> (a - b)/sqrt(2); the same
// convention at both ends of the interferometer. Reservoir modes untouched.
inline BranchPolynomial apply_beamsplitter(const BranchPolynomial& in) {
    BranchPolynomial out;
    for (SpinBranch s : kSpinBranches) {
        for (const auto& [mono, coeff] : in.branch(s)) {
            const int j = mono.guided_a();
            const int k = mono.guided_b();
            const double scale = std::pow(0.5, 0.5 * (j + k));
            for (int p = 0; p <= j; ++p) {
                const double cj = binomial(j, p);
                for (int q = 0; q <= k; ++q) {
                    const double ck = binomial(k, q);
                    const double sign = ((k - q) % 2 == 0) ? 1.0 : -1.0;
                    ModeMonomial next = mono;
                    next.n[0] = static_cast<std::uint8_t>(p + q);
                    next.n[1] = static_cast<std::uint8_t>((j - p) + (k - q));
                    out.add(s, next, coeff * cj * ck * sign * scale);
                }
            }
        }
    }
    out.prune();
    return out;
}

// Conditional scattering at the emitters. In branches with emitter 1 in the
// up state, a -> t1 a + t_e1 r1; with emitter 2 up, b -> t2 b + t_e2 r2.
// Down-coupled arms pass the photons unchanged.
inline BranchPolynomial apply_conditional_scatter(const BranchPolynomial& in,
                                                  const EmitterPair& pair, double omega) {
    const ScatterAmplitudes amp1 = scatter_amplitudes(pair.emitter1, omega);
    const ScatterAmplitudes amp2 = scatter_amplitudes(pair.emitter2, omega);

    BranchPolynomial out;
    for (SpinBranch s : kSpinBranches) {
        const bool scatter_a = emitter1_up(s);
        const bool scatter_b = emitter2_up(s);
        for (const auto& [mono, coeff] : in.branch(s)) {
            const int j = mono.guided_a();
            const int k = mono.guided_b();
            const int a_hi = scatter_a ? j : 0;  // photons diverted from arm a
            const int b_hi = scatter_b ? k : 0;
            for (int la = 0; la <= a_hi; ++la) {
                complexd ca = coeff;
                if (scatter_a) {
                    ca *= binomial(j, la);
                    for (int i = 0; i < j - la; ++i) ca *= amp1.t;
                    for (int i = 0; i < la; ++i) ca *= amp1.t_e;
                }
                if (ca == complexd{}) continue;
                for (int lb = 0; lb <= b_hi; ++lb) {
                    complexd cab = ca;
                    if (scatter_b) {
                        cab *= binomial(k, lb);
                        for (int i = 0; i < k - lb; ++i) cab *= amp2.t;
                        for (int i = 0; i < lb; ++i) cab *= amp2.t_e;
                    }
                    if (cab == complexd{}) continue;
                    ModeMonomial next = mono;
                    next.n[0] = static_cast<std::uint8_t>(j - la);
                    next.n[2] = static_cast<std::uint8_t>(mono.reservoir1() + la);
                    next.n[1] = static_cast<std::uint8_t>(k - lb);
                    next.n[3] = static_cast<std::uint8_t>(mono.reservoir2() + lb);
                    out.add(s, next, cab);
                }
            }
        }
    }
    out.prune();
    return out;
}

// Full interferometer pass: beamsplitter, conditional scattering,
// beamsplitter. The returned polynomial is what the detectors see.
inline BranchPolynomial detection_pipeline(int n_a, int n_b, const EmitterPair& pair,
                                           double omega) {
    validate(pair);
    BranchPolynomial state = probe_input(n_a, n_b);
    state = apply_beamsplitter(state);
    state = apply_conditional_scatter(state, pair, omega);
    state = apply_beamsplitter(state);
    return state;
}

} // namespace biphoton

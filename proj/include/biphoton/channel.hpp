#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "biphoton/emitter.hpp"
#include "biphoton/errors.hpp"
#include "biphoton/fock_polynomial.hpp"
#include "biphoton/two_qubit.hpp"

namespace biphoton {

enum class DetectorModel { Threshold, NumberResolving };

inline std::string_view to_string(DetectorModel d) {
    return d == DetectorModel::Threshold ? "threshold" : "number-resolving";
}

// One detection signature: its label and the Hermitian PSD kernel K_o whose
// Hadamard product with rho implements the measurement update.
struct Outcome {
    std::string label;        // "(1,0)" for threshold flags, "(j,k)" for exact counts
    int clicks_a = 0;         // threshold: 0/1 flag; number-resolving: exact count
    int clicks_b = 0;
    Eigen::Matrix4cd kernel;  // K_o, loss reservoirs already traced out
};

// Heralded measurement channel for one probe configuration. Outcomes are
// stored in the fixed sampling order: threshold (1,1), (1,0), (0,1), (0,0);
// number-resolving (j,k) by descending j+k, then descending j.
struct MeasurementChannel {
    int probe_a = 1;
    int probe_b = 1;
    DetectorModel detector = DetectorModel::Threshold;
    double omega = 0.0;
    std::vector<Outcome> outcomes;

    const Outcome& outcome(std::string_view label) const {
        for (const auto& o : outcomes)
            if (o.label == label) return o;
        throw InvalidConfig("unknown outcome label: " + std::string(label));
    }
};

namespace detail {

inline std::string outcome_label(int a, int b) {
    return "(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

} // namespace detail

// Builds the channel from first principles: evolve the probe exactly through
// beamsplitter / conditional scattering / beamsplitter, then contract each
// outcome's monomials into K_o[s,s'] = sum_mu A_s(mu) conj(A_s'(mu)) * w(mu),
// summing over all reservoir photon numbers (loss modes traced out).
inline MeasurementChannel detection_kernels(int n_a, int n_b, const EmitterPair& pair,
                                            double omega, DetectorModel detector) {
    const BranchPolynomial final_state = detection_pipeline(n_a, n_b, pair, omega);

    MeasurementChannel channel{n_a, n_b, detector, omega, {}};
    if (detector == DetectorModel::Threshold) {
        for (auto [a, b] : {std::pair{1, 1}, {1, 0}, {0, 1}, {0, 0}})
            channel.outcomes.push_back(
                {detail::outcome_label(a, b), a, b, Eigen::Matrix4cd::Zero()});
    } else {
        const int total = n_a + n_b;
        for (int sum = total; sum >= 0; --sum)
            for (int j = sum; j >= 0; --j)
                channel.outcomes.push_back(
                    {detail::outcome_label(j, sum - j), j, sum - j, Eigen::Matrix4cd::Zero()});
    }

    auto bucket_of = [&](const ModeMonomial& mono) -> Outcome& {
        const int j = mono.guided_a();
        const int k = mono.guided_b();
        if (detector == DetectorModel::Threshold) {
            const int idx = (j > 0 && k > 0) ? 0 : (j > 0 ? 1 : (k > 0 ? 2 : 3));
            return channel.outcomes[static_cast<std::size_t>(idx)];
        }
        for (auto& o : channel.outcomes)
            if (o.clicks_a == j && o.clicks_b == k) return o;
        throw NumericalFailure("monomial outside the outcome set");
    };

    // Union of monomials across branches, then per-monomial amplitude vector.
    std::map<ModeMonomial, Eigen::Vector4cd> amplitudes;
    for (SpinBranch s : kSpinBranches)
        for (const auto& [mono, coeff] : final_state.branch(s)) {
            auto [it, inserted] = amplitudes.try_emplace(mono, Eigen::Vector4cd::Zero());
            it->second(static_cast<int>(s)) = coeff;
        }

    for (const auto& [mono, amps] : amplitudes)
        bucket_of(mono).kernel += monomial_weight(mono) * (amps * amps.adjoint());

    return channel;
}

// P(o) = sum_s K_o[s,s] rho[s,s]; aligned with channel.outcomes.
inline std::vector<double> outcome_probabilities(const MeasurementChannel& channel,
                                                 const TwoQubitState& rho) {
    std::vector<double> probs;
    probs.reserve(channel.outcomes.size());
    for (const auto& o : channel.outcomes) {
        double p = 0.0;
        for (int s = 0; s < 4; ++s)
            p += o.kernel(s, s).real() * rho(s, s).real();
        probs.push_back(std::max(0.0, p));
    }
    return probs;
}

inline TwoQubitState apply_outcome(const TwoQubitState& rho, const Outcome& outcome) {
    Eigen::Matrix4cd updated = outcome.kernel.cwiseProduct(rho);
    const double norm = updated.trace().real();
    if (norm <= 1e-15)
        throw ZeroProbabilityOutcome("outcome " + outcome.label +
                                     " has vanishing probability");
    updated /= norm;
    return restore_physical(updated);
}

inline TwoQubitState apply_outcome(const MeasurementChannel& channel,
                                   const TwoQubitState& rho, std::string_view label) {
    return apply_outcome(rho, channel.outcome(label));
}

// Closed-form amplitudes of the lossless pure state after m coincidence and
// n same-detector events at probe frequency omega, with 0^0 = 1:
//   ( (T1+T2)^m (T1-T2)^n, (1+T1)^m (T1-1)^n, (1+T2)^m (1-T2)^n, 2^m 0^n ),
// T_i = t_i^2(omega). The two post-detection states of the next probe round
// are obtained by incrementing m (coincidence) or n (same detector).
inline Eigen::Vector4cd closed_form_amplitudes(const EmitterPair& pair, double omega,
                                               int m, int n) {
    validate(pair);
    if (!pair.lossless())
        throw InvalidConfig("closed form is defined for lossless emitters only");
    if (m < 0 || n < 0)
        throw InvalidConfig("event counts must be non-negative");

    const complexd t1 = transmission_amplitude(pair.emitter1, omega);
    const complexd t2 = transmission_amplitude(pair.emitter2, omega);
    const complexd T1 = t1 * t1;
    const complexd T2 = t2 * t2;

    auto ipow = [](complexd base, int e) {
        complexd r{1.0, 0.0};
        for (int i = 0; i < e; ++i) r *= base;
        return r;
    };

    // At a degenerate frequency T1 = T2 holds algebraically; the computed
    // difference is rounding of omega and would be amplified by the 2^m
    // growth of the other factor, so evaluate the identity exactly.
    complexd diff = T1 - T2;
    if (std::abs(diff) <= 1e-12 * (std::abs(T1) + std::abs(T2))) diff = complexd{};

    Eigen::Vector4cd amps;
    amps(0) = ipow(T1 + T2, m) * ipow(diff, n);
    amps(1) = ipow(1.0 + T1, m) * ipow(T1 - 1.0, n);
    amps(2) = ipow(1.0 + T2, m) * ipow(1.0 - T2, n);
    amps(3) = ipow(complexd{2.0, 0.0}, m) * (n == 0 ? complexd{1.0, 0.0} : complexd{});

    const double norm = amps.norm();
    if (!(norm > 0.0))
        throw DegenerateState("all closed-form amplitudes vanish for (m=" +
                              std::to_string(m) + ", n=" + std::to_string(n) + ")");
    return amps / norm;
}

inline TwoQubitState lossless_closed_form(const EmitterPair& pair, double omega, int m,
                                          int n) {
    return pure_state(closed_form_amplitudes(pair, omega, m, n));
}

} // namespace biphoton

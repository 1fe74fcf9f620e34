#pragma once

#include <cmath>
#include <string_view>
#include <vector>

#include "biphoton/emitter.hpp"
#include "biphoton/errors.hpp"

namespace biphoton {

// Which closed-form solution of t1^2(w) = t2^2(w) produced a candidate.
// The quadratic branches solve t1 = -t2, the linewidth-ratio branch t1 = +t2.
// "resonance" tags the identical-emitter case, where the condition holds at
// every frequency and resonance is returned by convention.
enum class FrequencyBranch { QuadraticPlus, QuadraticMinus, LinewidthRatio, Resonance };

inline std::string_view to_string(FrequencyBranch b) {
    switch (b) {
        case FrequencyBranch::QuadraticPlus: return "quadratic-plus";
        case FrequencyBranch::QuadraticMinus: return "quadratic-minus";
        case FrequencyBranch::LinewidthRatio: return "linewidth-ratio";
        case FrequencyBranch::Resonance: return "resonance";
    }
    return "?";
}

struct FrequencyCandidate {
    double omega = 0.0;
    FrequencyBranch branch = FrequencyBranch::QuadraticPlus;
    double residual = 0.0;  // |t1^2 - t2^2| evaluated with gamma = 0
};

using FrequencyCandidates = std::vector<FrequencyCandidate>;

// |t1^2(w) - t2^2(w)| with the loss channels switched off. Candidates are
// always scored in the lossless system; the lossy simulation then probes at
// the same frequency.
inline double degeneracy_residual(const EmitterPair& pair, double omega) {
    const EmitterPair ideal = pair.without_loss();
    const complexd t1 = transmission_amplitude(ideal.emitter1, omega);
    const complexd t2 = transmission_amplitude(ideal.emitter2, omega);
    return std::abs(t1 * t1 - t2 * t2);
}

// All real frequencies with t1^2(w) = t2^2(w) at gamma = 0:
//   w = (E1 + E2 )/2 +- sqrt((E1 - E2)^2 - Gamma1 Gamma2)/2   (t1 = -t2)
//   w = (E2 Gamma1 - E1 Gamma2) / (Gamma1 - Gamma2)           (t1 = +t2)
// Duplicates within 1e-12 are merged, keeping the earlier branch.
inline FrequencyCandidates candidate_frequencies(const EmitterPair& pair) {
    validate(pair);
    const double e1 = pair.emitter1.energy;
    const double e2 = pair.emitter2.energy;
    const double g1 = pair.emitter1.gamma_guided;
    const double g2 = pair.emitter2.gamma_guided;

    if (e1 == e2 && g1 == g2) {
        // Identical emitters: the condition holds identically; resonance
        // maximizes the phase contrast (t = -1).
        return {FrequencyCandidate{e1, FrequencyBranch::Resonance,
                                   degeneracy_residual(pair, e1)}};
    }

    FrequencyCandidates out;
    const double disc = (e1 - e2) * (e1 - e2) - g1 * g2;
    if (disc >= 0.0) {
        const double mid = 0.5 * (e1 + e2);
        const double half = 0.5 * std::sqrt(disc);
        out.push_back({mid + half, FrequencyBranch::QuadraticPlus, 0.0});
        out.push_back({mid - half, FrequencyBranch::QuadraticMinus, 0.0});
    }
    if (g1 != g2) {
        out.push_back({(e2 * g1 - e1 * g2) / (g1 - g2), FrequencyBranch::LinewidthRatio, 0.0});
    }

    FrequencyCandidates unique;
    for (const auto& cand : out) {
        bool dup = false;
        for (const auto& kept : unique)
            if (std::abs(kept.omega - cand.omega) <= 1e-12) { dup = true; break; }
        if (!dup) unique.push_back(cand);
    }
    if (unique.empty())
        throw EmptyCandidates(
            "no degenerate probe frequency: (E1-E2)^2 - Gamma1*Gamma2 < 0 and Gamma1 == Gamma2");

    for (auto& cand : unique) cand.residual = degeneracy_residual(pair, cand.omega);
    return unique;
}

} // namespace biphoton

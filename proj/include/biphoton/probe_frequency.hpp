#pragma once

#include <cmath>

#include "biphoton/channel.hpp"
#include "biphoton/concurrence.hpp"
#include "biphoton/frequency.hpp"

namespace biphoton {

// Probability-weighted concurrence after one lossless biphoton round from the
// uniform superposition state. The scoring is always lossless, matching the
// convention that probe frequencies are chosen in the ideal system.
inline double one_round_expected_concurrence(const EmitterPair& pair, double omega) {
    const EmitterPair ideal = pair.without_loss();
    const MeasurementChannel channel =
        detection_kernels(1, 1, ideal, omega, DetectorModel::Threshold);
    const TwoQubitState rho = initial_state();
    const std::vector<double> probs = outcome_probabilities(channel, rho);

    double expected = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 1e-15) continue;
        expected += probs[i] * concurrence(apply_outcome(rho, channel.outcomes[i])).value;
    }
    return expected;
}

// Deterministic pick among the candidates: maximize the one-round expected
// concurrence; break ties by distance to the mean emitter energy, then by
// candidate order.
inline FrequencyCandidate select_probe_frequency(const EmitterPair& pair,
                                                 const FrequencyCandidates& candidates) {
    if (candidates.empty())
        throw EmptyCandidates("no probe-frequency candidates to select from");

    const double center = 0.5 * (pair.emitter1.energy + pair.emitter2.energy);
    std::size_t best = 0;
    double best_score = one_round_expected_concurrence(pair, candidates[0].omega);
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const double score = one_round_expected_concurrence(pair, candidates[i].omega);
        if (score > best_score + 1e-12) {
            best = i;
            best_score = score;
        } else if (std::abs(score - best_score) <= 1e-12 &&
                   std::abs(candidates[i].omega - center) + 1e-12 <
                       std::abs(candidates[best].omega - center)) {
            best = i;
        }
    }
    return candidates[best];
}

inline FrequencyCandidate select_probe_frequency(const EmitterPair& pair) {
    return select_probe_frequency(pair, candidate_frequencies(pair));
}

} // namespace biphoton

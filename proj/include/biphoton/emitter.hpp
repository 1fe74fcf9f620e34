#pragma once

#include <cmath>
#include <complex>
#include <optional>

#include "biphoton/errors.hpp"

namespace biphoton {

using complexd = std::complex<double>;

// Two-level-plus-spin emitter in the forward-scattering (chiral) regime.
// All rates and energies are dimensionless: hbar = 1 and the reference
// linewidth Gamma_1 = 1 set the units.
struct Emitter {
    double energy = 0.0;        // transition energy E
    double gamma_guided = 1.0;  // coupling rate to the waveguide mode
    double gamma_loss = 0.0;    // coupling rate to non-guided (loss) modes

    bool valid() const {
        return std::isfinite(energy) && std::isfinite(gamma_guided) &&
               std::isfinite(gamma_loss) && gamma_guided > 0.0 && gamma_loss >= 0.0;
    }
};

inline void validate(const Emitter& e) {
    if (!e.valid())
        throw InvalidConfig("emitter requires finite E, Gamma > 0, gamma >= 0");
}

// Guided coupling as a fraction of the total coupling, in (0, 1].
inline double beta_factor(const Emitter& e) {
    return e.gamma_guided / (e.gamma_guided + e.gamma_loss);
}

// Inverse of beta_factor: gamma = Gamma (1 - beta) / beta.
inline Emitter make_emitter(double energy, double gamma_guided, double beta) {
    if (!(beta > 0.0 && beta <= 1.0))
        throw InvalidConfig("beta factor must lie in (0, 1]");
    return Emitter{energy, gamma_guided, gamma_guided * (1.0 - beta) / beta};
}

struct EmitterPair {
    Emitter emitter1;
    Emitter emitter2;

    double detuning() const { return std::abs(emitter2.energy - emitter1.energy); }
    bool lossless() const { return emitter1.gamma_loss == 0.0 && emitter2.gamma_loss == 0.0; }
    EmitterPair without_loss() const {
        return EmitterPair{Emitter{emitter1.energy, emitter1.gamma_guided, 0.0},
                           Emitter{emitter2.energy, emitter2.gamma_guided, 0.0}};
    }
};

inline void validate(const EmitterPair& p) {
    validate(p.emitter1);
    validate(p.emitter2);
}

// Figure-axis parameterization: E1 = 0, Gamma1 = 1, E2 = delta, Gamma2 = ratio.
// Both emitters share beta unless beta2 is given.
inline EmitterPair pair_from_ratios(double delta_ratio, double gamma_ratio,
                                    double beta1 = 1.0,
                                    std::optional<double> beta2 = std::nullopt) {
    if (!(delta_ratio >= 0.0))
        throw InvalidConfig("delta/Gamma1 must be >= 0");
    if (!(gamma_ratio > 0.0))
        throw InvalidConfig("Gamma2/Gamma1 must be > 0");
    return EmitterPair{make_emitter(0.0, 1.0, beta1),
                       make_emitter(delta_ratio, gamma_ratio, beta2.value_or(beta1))};
}

// Transmission amplitude of a guided photon scattering off the up-coupled
// transition:  t(w) = (w - E - i(Gamma - gamma)/2) / (w - E + i(Gamma + gamma)/2).
// Unimodular when gamma = 0.
inline complexd transmission_amplitude(const Emitter& e, double omega) {
    const double detuned = omega - e.energy;
    return complexd(detuned, -0.5 * (e.gamma_guided - e.gamma_loss)) /
           complexd(detuned, 0.5 * (e.gamma_guided + e.gamma_loss));
}

// Amplitude for the scattered photon to leave into the non-guided modes:
// t_e(w) = -i sqrt(Gamma gamma) / (w - E + i(Gamma + gamma)/2).
// |t|^2 + |t_e|^2 = 1 identically.
inline complexd loss_amplitude(const Emitter& e, double omega) {
    const double detuned = omega - e.energy;
    return complexd(0.0, -std::sqrt(e.gamma_guided * e.gamma_loss)) /
           complexd(detuned, 0.5 * (e.gamma_guided + e.gamma_loss));
}

struct ScatterAmplitudes {
    complexd t;    // guided transmission
    complexd t_e;  // loss channel
};

inline ScatterAmplitudes scatter_amplitudes(const Emitter& e, double omega) {
    return ScatterAmplitudes{transmission_amplitude(e, omega), loss_amplitude(e, omega)};
}

} // namespace biphoton

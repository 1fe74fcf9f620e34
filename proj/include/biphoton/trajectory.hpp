#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "biphoton/channel.hpp"
#include "biphoton/concurrence.hpp"
#include "biphoton/errors.hpp"
#include "biphoton/probe_frequency.hpp"
#include "biphoton/rng.hpp"

namespace biphoton {

// The bit flip rebalances the up/up vs down/down amplitude accumulation that
// the loss channels introduce. "lossy_only" applies it after every detection
// event, including (0,0), whenever either emitter has a loss channel.
enum class BitFlipPolicy { Never, Always, LossyOnly };

inline std::string_view to_string(BitFlipPolicy p) {
    switch (p) {
        case BitFlipPolicy::Never: return "never";
        case BitFlipPolicy::Always: return "always";
        case BitFlipPolicy::LossyOnly: return "lossy-only";
    }
    return "?";
}

struct ProbeMixEntry {
    int n_a = 1;
    int n_b = 1;
    double probability = 1.0;
};

struct SimulationConfig {
    EmitterPair pair = pair_from_ratios(3.0, 1.0);
    std::vector<ProbeMixEntry> probe_mix = {{1, 1, 1.0}};
    DetectorModel detector = DetectorModel::Threshold;
    std::optional<double> omega;            // nullopt: auto-select
    BitFlipPolicy bit_flip = BitFlipPolicy::LossyOnly;
    int max_events = 200;
    std::optional<double> stop_threshold = 0.999;  // nullopt: run to max_events

    bool lossy() const {
        return pair.emitter1.gamma_loss > 0.0 || pair.emitter2.gamma_loss > 0.0;
    }

    bool flip_after_events() const {
        return bit_flip == BitFlipPolicy::Always ||
               (bit_flip == BitFlipPolicy::LossyOnly && lossy());
    }

    void validate_config() const {
        validate(pair);
        if (probe_mix.empty())
            throw InvalidConfig("probe mix must not be empty");
        double total = 0.0;
        for (const auto& entry : probe_mix) {
            if (entry.n_a < 0 || entry.n_b < 0 || entry.n_a + entry.n_b < 1)
                throw InvalidConfig("probe mix entries need at least one photon");
            if (!(entry.probability >= 0.0 && entry.probability <= 1.0))
                throw InvalidConfig("probe mix probabilities must lie in [0, 1]");
            total += entry.probability;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw InvalidConfig("probe mix probabilities must sum to 1");
        if (max_events < 1)
            throw InvalidConfig("max_events must be >= 1");
        if (stop_threshold && !(*stop_threshold > 0.0 && *stop_threshold <= 1.0))
            throw InvalidConfig("stop threshold must lie in (0, 1]");
        if (omega && !std::isfinite(*omega))
            throw InvalidConfig("probe frequency must be finite");
    }
};

struct ResolvedFrequency {
    double omega = 0.0;
    std::string source;  // branch name, or "explicit"
};

inline ResolvedFrequency resolve_frequency(const SimulationConfig& config) {
    if (config.omega) return {*config.omega, "explicit"};
    const FrequencyCandidate chosen = select_probe_frequency(config.pair);
    return {chosen.omega, std::string(to_string(chosen.branch))};
}

// One channel per probe-mix entry, in mix order; computed once per run and
// shared read-only across trajectories.
inline std::vector<MeasurementChannel> build_channels(const SimulationConfig& config,
                                                      double omega) {
    std::vector<MeasurementChannel> channels;
    channels.reserve(config.probe_mix.size());
    for (const auto& entry : config.probe_mix)
        channels.push_back(
            detection_kernels(entry.n_a, entry.n_b, config.pair, omega, config.detector));
    return channels;
}

struct EventRecord {
    int index = 0;  // 1-based; counts every sampled outcome, including (0,0)
    std::string outcome;
    double probability = 0.0;  // outcome probability at sampling time
    double concurrence = 0.0;  // post-update
    double purity = 0.0;
};

enum class StopReason { ThresholdReached, MaxEvents };

struct TrajectoryRecord {
    std::uint64_t seed = 0;
    double omega = 0.0;
    std::vector<EventRecord> events;
    StopReason stop = StopReason::MaxEvents;
};

// Deterministic in (config, seed): per event, one uniform draw samples the
// probe, a second samples the outcome against the cumulative distribution in
// the channel's fixed outcome order.
inline TrajectoryRecord run_trajectory(const SimulationConfig& config, std::uint64_t seed,
                                       double omega,
                                       const std::vector<MeasurementChannel>& channels) {
    config.validate_config();
    if (channels.size() != config.probe_mix.size())
        throw InvalidConfig("one channel per probe-mix entry required");

    TrajectoryRecord record;
    record.seed = seed;
    record.omega = omega;
    record.events.reserve(static_cast<std::size_t>(config.max_events));

    Xoshiro256StarStar rng(seed);
    TwoQubitState rho = initial_state();
    const bool flip = config.flip_after_events();

    for (int event = 1; event <= config.max_events; ++event) {
        const double u_probe = rng.uniform01();
        std::size_t probe_idx = config.probe_mix.size() - 1;
        double cumulative = 0.0;
        for (std::size_t i = 0; i < config.probe_mix.size(); ++i) {
            cumulative += config.probe_mix[i].probability;
            if (u_probe < cumulative) { probe_idx = i; break; }
        }
        const MeasurementChannel& channel = channels[probe_idx];

        const std::vector<double> probs = outcome_probabilities(channel, rho);
        const double u_outcome = rng.uniform01();
        std::size_t outcome_idx = probs.size() - 1;
        cumulative = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            cumulative += probs[i];
            if (u_outcome < cumulative) { outcome_idx = i; break; }
        }
        // Guard against landing in the trailing rounding gap on a zero-
        // probability last outcome.
        while (outcome_idx > 0 && probs[outcome_idx] <= 1e-15) --outcome_idx;

        rho = apply_outcome(rho, channel.outcomes[outcome_idx]);
        if (flip) rho = bit_flip(rho);

        const double c = concurrence(rho).value;
        record.events.push_back({event, channel.outcomes[outcome_idx].label,
                                 probs[outcome_idx], c, purity(rho)});

        if (config.stop_threshold && c >= *config.stop_threshold) {
            record.stop = StopReason::ThresholdReached;
            return record;
        }
    }
    record.stop = StopReason::MaxEvents;
    return record;
}

inline TrajectoryRecord run_trajectory(const SimulationConfig& config, std::uint64_t seed) {
    config.validate_config();
    const ResolvedFrequency freq = resolve_frequency(config);
    return run_trajectory(config, seed, freq.omega, build_channels(config, freq.omega));
}

struct EnsembleSummary {
    int count = 0;
    double threshold = 0.999;
    // Per event index 1..max_events: 5/25/50/75/95% concurrence quantiles,
    // with each trajectory's final value carried forward past its stop event.
    std::vector<std::array<double, 5>> concurrence_quantiles;
    double median_events_to_threshold = std::numeric_limits<double>::infinity();
    double frac_above_099_within_10 = 0.0;
    double frac_reached_threshold = 0.0;
};

namespace detail {

// Type-7 (linear interpolation) quantile of sorted data; tolerates +inf.
inline double sorted_quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0 || lo + 1 == sorted.size()) return sorted[lo];
    const double a = sorted[lo];
    const double b = sorted[lo + 1];
    if (std::isinf(b)) return std::isinf(a) ? a : b;
    return a + frac * (b - a);
}

struct TrajectoryDigest {
    std::vector<double> padded;  // concurrence per event, carried forward
    double events_to_threshold = std::numeric_limits<double>::infinity();
    bool above_099_within_10 = false;
};

inline TrajectoryDigest digest_trajectory(const TrajectoryRecord& record,
                                          const SimulationConfig& config) {
    TrajectoryDigest digest;
    digest.padded.resize(static_cast<std::size_t>(config.max_events), 0.0);
    double last = 0.0;
    for (std::size_t e = 0; e < digest.padded.size(); ++e) {
        if (e < record.events.size()) last = record.events[e].concurrence;
        digest.padded[e] = last;
        if (e < 10 && last > 0.99) digest.above_099_within_10 = true;
        if (config.stop_threshold && std::isinf(digest.events_to_threshold) &&
            last >= *config.stop_threshold)
            digest.events_to_threshold = static_cast<double>(e + 1);
    }
    return digest;
}

} // namespace detail

inline EnsembleSummary summarize_ensemble(const SimulationConfig& config,
                                          const std::vector<detail::TrajectoryDigest>& digests) {
    EnsembleSummary summary;
    summary.count = static_cast<int>(digests.size());
    summary.threshold = config.stop_threshold.value_or(
        std::numeric_limits<double>::quiet_NaN());

    const std::size_t events = static_cast<std::size_t>(config.max_events);
    summary.concurrence_quantiles.resize(events);
    std::vector<double> column(digests.size());
    for (std::size_t e = 0; e < events; ++e) {
        for (std::size_t i = 0; i < digests.size(); ++i) column[i] = digests[i].padded[e];
        std::sort(column.begin(), column.end());
        summary.concurrence_quantiles[e] = {
            detail::sorted_quantile(column, 0.05), detail::sorted_quantile(column, 0.25),
            detail::sorted_quantile(column, 0.50), detail::sorted_quantile(column, 0.75),
            detail::sorted_quantile(column, 0.95)};
    }

    std::vector<double> to_threshold;
    to_threshold.reserve(digests.size());
    int reached = 0;
    int above = 0;
    for (const auto& digest : digests) {
        to_threshold.push_back(digest.events_to_threshold);
        if (!std::isinf(digest.events_to_threshold)) ++reached;
        if (digest.above_099_within_10) ++above;
    }
    std::sort(to_threshold.begin(), to_threshold.end());
    summary.median_events_to_threshold = detail::sorted_quantile(to_threshold, 0.50);
    summary.frac_reached_threshold =
        static_cast<double>(reached) / static_cast<double>(digests.size());
    summary.frac_above_099_within_10 =
        static_cast<double>(above) / static_cast<double>(digests.size());
    return summary;
}

// Seeds are split_seed(base_seed, i); trajectories are independent and run on
// a small thread pool. The summary depends only on the digest matrix, so the
// result is identical for any execution order or thread count.
inline EnsembleSummary run_ensemble(const SimulationConfig& config, std::uint64_t base_seed,
                                    int count) {
    config.validate_config();
    if (count < 1)
        throw InvalidConfig("ensemble count must be >= 1");

    const ResolvedFrequency freq = resolve_frequency(config);
    const std::vector<MeasurementChannel> channels = build_channels(config, freq.omega);

    std::vector<detail::TrajectoryDigest> digests(static_cast<std::size_t>(count));
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers =
        std::min<unsigned>(hw, static_cast<unsigned>(std::min(count, 16)));

    auto work = [&](unsigned worker) {
        for (int i = static_cast<int>(worker); i < count; i += static_cast<int>(workers)) {
            const TrajectoryRecord record = run_trajectory(
                config, split_seed(base_seed, static_cast<std::uint64_t>(i)), freq.omega,
                channels);
            digests[static_cast<std::size_t>(i)] = detail::digest_trajectory(record, config);
        }
    };

    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    return summarize_ensemble(config, digests);
}

struct SweepPoint {
    double delta_ratio = 0.0;
    double gamma_ratio = 1.0;
    double beta = 1.0;
};

struct SweepCell {
    SweepPoint point;
    std::optional<double> omega;
    std::optional<EnsembleSummary> summary;
    std::string failure;  // empty on success, e.g. "NO_FREQ"
};

// Grid sweep in row-major (delta, gamma_ratio, beta) order. Cells are
// independent; a cell without a degenerate frequency is reported as a failed
// cell, not a run abort. Every cell reuses base_seed.
inline std::vector<SweepCell> parameter_sweep(const std::vector<double>& delta_ratios,
                                              const std::vector<double>& gamma_ratios,
                                              const std::vector<double>& betas,
                                              const SimulationConfig& base,
                                              std::uint64_t base_seed, int count) {
    if (delta_ratios.empty() || gamma_ratios.empty() || betas.empty())
        throw InvalidConfig("sweep grid must not be empty");

    std::vector<SweepCell> cells;
    cells.reserve(delta_ratios.size() * gamma_ratios.size() * betas.size());
    for (double delta : delta_ratios)
        for (double gamma : gamma_ratios)
            for (double beta : betas) {
                SweepCell cell;
                cell.point = {delta, gamma, beta};
                try {
                    SimulationConfig config = base;
                    config.pair = pair_from_ratios(delta, gamma, beta, beta);
                    const ResolvedFrequency freq = resolve_frequency(config);
                    config.omega = freq.omega;
                    cell.omega = freq.omega;
                    cell.summary = run_ensemble(config, base_seed, count);
                } catch (const EmptyCandidates&) {
                    cell.failure = "NO_FREQ";
                } catch (const DomainError& err) {
                    cell.failure = std::string("INVALID: ") + err.what();
                }
                cells.push_back(std::move(cell));
            }
    return cells;
}

} // namespace biphoton

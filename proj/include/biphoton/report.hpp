#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

#include "biphoton/errors.hpp"
#include "biphoton/frequency.hpp"
#include "biphoton/rng.hpp"
#include "biphoton/trajectory.hpp"
#include "biphoton/version.hpp"

namespace biphoton {

inline constexpr std::string_view kTrajectorySchema = "biphoton.trajectory.v1";
inline constexpr std::string_view kEnsembleSchema = "biphoton.ensemble.v1";
inline constexpr std::string_view kEnsembleStatsSchema = "biphoton.ensemble-stats.v1";
inline constexpr std::string_view kSweepSchema = "biphoton.sweep.v1";
inline constexpr std::string_view kFreqSchema = "biphoton.freq.v1";
inline constexpr std::string_view kManifestSchema = "biphoton.manifest.v1";

// Shortest decimal representation that round-trips to the same double.
inline std::string format_number(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

inline std::string csv_quote(std::string_view field) {
    std::string out = "\"";
    for (char c : field) {
        out += c;
        if (c == '"') out += '"';
    }
    out += '"';
    return out;
}

inline std::string trajectory_csv(const TrajectoryRecord& record) {
    std::string out;
    out += "#schema=";
    out += kTrajectorySchema;
    out += "\nevent,outcome,probability,concurrence,purity\n";
    for (const auto& e : record.events) {
        out += std::to_string(e.index);
        out += ',';
        out += csv_quote(e.outcome);
        out += ',';
        out += format_number(e.probability);
        out += ',';
        out += format_number(e.concurrence);
        out += ',';
        out += format_number(e.purity);
        out += '\n';
    }
    return out;
}

inline std::string ensemble_quantiles_csv(const EnsembleSummary& summary) {
    std::string out;
    out += "#schema=";
    out += kEnsembleSchema;
    out += "\nevent,q05,q25,q50,q75,q95\n";
    for (std::size_t e = 0; e < summary.concurrence_quantiles.size(); ++e) {
        out += std::to_string(e + 1);
        for (double q : summary.concurrence_quantiles[e]) {
            out += ',';
            out += format_number(q);
        }
        out += '\n';
    }
    return out;
}

// Infinite medians (threshold never reached by the median trajectory) are
// encoded as JSON null.
inline nlohmann::json ensemble_stats_json(const EnsembleSummary& summary) {
    nlohmann::json stats;
    stats["schema"] = kEnsembleStatsSchema;
    stats["count"] = summary.count;
    stats["threshold"] =
        std::isnan(summary.threshold) ? nlohmann::json(nullptr) : nlohmann::json(summary.threshold);
    stats["median_events_to_threshold"] =
        std::isfinite(summary.median_events_to_threshold)
            ? nlohmann::json(summary.median_events_to_threshold)
            : nlohmann::json(nullptr);
    stats["frac_concurrence_gt_099_within_10"] = summary.frac_above_099_within_10;
    stats["frac_reached_threshold"] = summary.frac_reached_threshold;
    return stats;
}

inline std::string sweep_csv(const std::vector<SweepCell>& cells) {
    std::string out;
    out += "#schema=";
    out += kSweepSchema;
    out += "\ndelta_ratio,gamma_ratio,beta,selected_omega,median_events,frac_gt_099_in_10,"
           "frac_reached,status\n";
    for (const auto& cell : cells) {
        out += format_number(cell.point.delta_ratio);
        out += ',';
        out += format_number(cell.point.gamma_ratio);
        out += ',';
        out += format_number(cell.point.beta);
        out += ',';
        if (cell.summary) {
            out += format_number(*cell.omega);
            out += ',';
            out += format_number(cell.summary->median_events_to_threshold);
            out += ',';
            out += format_number(cell.summary->frac_above_099_within_10);
            out += ',';
            out += format_number(cell.summary->frac_reached_threshold);
            out += ",OK\n";
        } else {
            out += ",,,,";
            out += cell.failure.empty() ? "FAILED" : cell.failure;
            out += '\n';
        }
    }
    return out;
}

inline std::string freq_csv(const FrequencyCandidates& candidates,
                            const FrequencyCandidate& selected) {
    std::string out;
    out += "#schema=";
    out += kFreqSchema;
    out += "\nbranch,omega,residual,selected\n";
    for (const auto& cand : candidates) {
        out += to_string(cand.branch);
        out += ',';
        out += format_number(cand.omega);
        out += ',';
        out += format_number(cand.residual);
        out += ',';
        out += (cand.omega == selected.omega && cand.branch == selected.branch) ? '1' : '0';
        out += '\n';
    }
    return out;
}

inline std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        throw NumericalFailure("SHA-256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

// Parses "na,nb:p;na,nb:p" probe-mix descriptions, e.g. "1,1:0.85;2,2:0.15".
inline std::vector<ProbeMixEntry> parse_probe_mix(std::string_view text) {
    std::vector<ProbeMixEntry> mix;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find(';', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view part = text.substr(pos, end - pos);
        if (part.empty())
            throw InvalidConfig("empty probe-mix entry");
        const std::size_t comma = part.find(',');
        const std::size_t colon = part.find(':', comma == std::string_view::npos ? 0 : comma);
        if (comma == std::string_view::npos || colon == std::string_view::npos || comma > colon)
            throw InvalidConfig("probe-mix entries must look like \"na,nb:p\"");
        ProbeMixEntry entry;
        auto parse_int = [&](std::string_view s, int& out_value) {
            const auto res = std::from_chars(s.data(), s.data() + s.size(), out_value);
            if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
                throw InvalidConfig("bad photon count in probe mix: " + std::string(s));
        };
        parse_int(part.substr(0, comma), entry.n_a);
        parse_int(part.substr(comma + 1, colon - comma - 1), entry.n_b);
        const std::string_view prob = part.substr(colon + 1);
        const auto res =
            std::from_chars(prob.data(), prob.data() + prob.size(), entry.probability);
        if (res.ec != std::errc{} || res.ptr != prob.data() + prob.size())
            throw InvalidConfig("bad probability in probe mix: " + std::string(prob));
        mix.push_back(entry);
        if (end == text.size()) break;
        pos = end + 1;
    }
    if (mix.empty())
        throw InvalidConfig("probe mix must not be empty");
    return mix;
}

inline std::string render_probe_mix(const std::vector<ProbeMixEntry>& mix) {
    std::string out;
    for (const auto& entry : mix) {
        if (!out.empty()) out += ';';
        out += std::to_string(entry.n_a) + "," + std::to_string(entry.n_b) + ":" +
               format_number(entry.probability);
    }
    return out;
}

// Fully resolved configuration echo; re-running with these values reproduces
// the data files byte for byte.
inline nlohmann::json config_json(const SimulationConfig& config,
                                  const ResolvedFrequency& freq) {
    nlohmann::json j;
    j["emitters"] = {
        {"e1", config.pair.emitter1.energy},
        {"gamma1", config.pair.emitter1.gamma_guided},
        {"loss1", config.pair.emitter1.gamma_loss},
        {"beta1", beta_factor(config.pair.emitter1)},
        {"e2", config.pair.emitter2.energy},
        {"gamma2", config.pair.emitter2.gamma_guided},
        {"loss2", config.pair.emitter2.gamma_loss},
        {"beta2", beta_factor(config.pair.emitter2)},
    };
    j["frequency"] = {{"omega", freq.omega}, {"source", freq.source}};
    j["probe_mix"] = render_probe_mix(config.probe_mix);
    j["detector"] = to_string(config.detector);
    j["bit_flip_policy"] = to_string(config.bit_flip);
    j["max_events"] = config.max_events;
    if (config.stop_threshold)
        j["stop_threshold"] = *config.stop_threshold;
    else
        j["stop_threshold"] = nullptr;
    j["rng"] = {{"generator", kRngIdentity},
                {"seed_split", kSeedSplitIdentity},
                {"outcome_order",
                 "threshold: (1,1),(1,0),(0,1),(0,0); number-resolving: j+k desc, then j desc"}};
    return j;
}

struct ManifestOutput {
    std::string path;  // relative to the manifest location
    std::string sha256;
    std::size_t bytes = 0;
};

inline nlohmann::json manifest_json(std::string_view command, const nlohmann::json& config,
                                    const std::vector<ManifestOutput>& outputs,
                                    std::string_view created_utc) {
    nlohmann::json m;
    m["schema"] = kManifestSchema;
    m["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    m["command"] = command;
    m["created_utc"] = created_utc;
    m["config"] = config;
    m["outputs"] = nlohmann::json::array();
    for (const auto& out : outputs)
        m["outputs"].push_back(
            {{"file", out.path}, {"sha256", out.sha256}, {"bytes", out.bytes}});
    return m;
}

} // namespace biphoton

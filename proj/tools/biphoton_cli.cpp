// Batch CLI for the heralded-entanglement simulator: solve probe frequencies,
// run single trajectories, seeded ensembles, and parameter sweeps. All data
// files are schema-versioned CSV/JSON and reproducible from the run manifest.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "biphoton/report.hpp"

namespace fs = std::filesystem;
using namespace biphoton;

namespace {

struct EmitterOpts {
    std::optional<double> delta;
    std::optional<double> gamma_ratio;
    std::optional<double> e1, e2, gamma1, gamma2;
    double beta = 1.0;
    std::optional<double> beta2;
};

struct SimOpts {
    std::string omega = "auto";
    std::string probe_mix = "1,1:1";
    std::string detector = "threshold";
    std::string bitflip = "lossy-only";
    std::string threshold = "0.999";
    std::uint64_t seed = 1;
    int count = 1000;
    int max_events = 200;
    std::string out_dir = ".";
};

// Key=value config file support. Values fill any option the command line did
// not set, so flags always override the file.
struct ConfigBinding {
    std::string key;
    std::function<void(const std::string&)> apply;
};

double parse_double_value(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double parsed = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw InvalidConfig("config key " + key + " expects a number, got \"" + value + "\"");
    }
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= value.size()) {
        std::size_t end = value.find(',', pos);
        if (end == std::string::npos) end = value.size();
        out.push_back(parse_double_value(key, value.substr(pos, end - pos)));
        if (end == value.size()) break;
        pos = end + 1;
    }
    return out;
}

void apply_config_file(CLI::App* cmd, const std::string& path,
                       const std::vector<ConfigBinding>& bindings) {
    if (path.empty()) return;
    std::ifstream file(path);
    if (!file)
        throw InvalidConfig("cannot read config file: " + path);
    std::string line;
    int lineno = 0;
    auto trim = [](std::string text) {
        const auto first = text.find_first_not_of(" \t\r");
        if (first == std::string::npos) return std::string{};
        const auto last = text.find_last_not_of(" \t\r");
        return text.substr(first, last - first + 1);
    };
    while (std::getline(file, line)) {
        ++lineno;
        const std::string entry = trim(line);
        if (entry.empty() || entry[0] == '#' || entry[0] == ';') continue;
        const std::size_t eq = entry.find('=');
        if (eq == std::string::npos)
            throw InvalidConfig("config line " + std::to_string(lineno) +
                                " is not key=value: " + entry);
        const std::string key = trim(entry.substr(0, eq));
        const std::string value = trim(entry.substr(eq + 1));
        const auto binding =
            std::find_if(bindings.begin(), bindings.end(),
                         [&](const ConfigBinding& b) { return b.key == key; });
        if (binding == bindings.end())
            throw InvalidConfig("unknown config key: " + key);
        const CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt != nullptr && opt->count() > 0) continue;
        binding->apply(value);
    }
}

std::vector<ConfigBinding> emitter_bindings(EmitterOpts& opts) {
    return {
        {"delta", [&](const std::string& v) { opts.delta = parse_double_value("delta", v); }},
        {"gamma-ratio",
         [&](const std::string& v) { opts.gamma_ratio = parse_double_value("gamma-ratio", v); }},
        {"e1", [&](const std::string& v) { opts.e1 = parse_double_value("e1", v); }},
        {"e2", [&](const std::string& v) { opts.e2 = parse_double_value("e2", v); }},
        {"gamma1", [&](const std::string& v) { opts.gamma1 = parse_double_value("gamma1", v); }},
        {"gamma2", [&](const std::string& v) { opts.gamma2 = parse_double_value("gamma2", v); }},
        {"beta", [&](const std::string& v) { opts.beta = parse_double_value("beta", v); }},
        {"beta2", [&](const std::string& v) { opts.beta2 = parse_double_value("beta2", v); }},
    };
}

std::vector<ConfigBinding> sim_bindings(SimOpts& opts) {
    return {
        {"omega", [&](const std::string& v) { opts.omega = v; }},
        {"probe-mix", [&](const std::string& v) { opts.probe_mix = v; }},
        {"detector", [&](const std::string& v) { opts.detector = v; }},
        {"bitflip", [&](const std::string& v) { opts.bitflip = v; }},
        {"threshold", [&](const std::string& v) { opts.threshold = v; }},
        {"seed",
         [&](const std::string& v) {
             opts.seed = static_cast<std::uint64_t>(
                 std::strtoull(v.c_str(), nullptr, 10));
         }},
        {"count",
         [&](const std::string& v) { opts.count = static_cast<int>(parse_double_value("count", v)); }},
        {"max-events",
         [&](const std::string& v) {
             opts.max_events = static_cast<int>(parse_double_value("max-events", v));
         }},
        {"out", [&](const std::string& v) { opts.out_dir = v; }},
    };
}

void add_emitter_options(CLI::App* cmd, EmitterOpts& opts) {
    cmd->add_option("--delta", opts.delta, "Detuning delta/Gamma1 (ratio form, E1=0, Gamma1=1)")
        ->envname("BIPHOTON_DELTA");
    cmd->add_option("--gamma-ratio", opts.gamma_ratio, "Linewidth ratio Gamma2/Gamma1")
        ->envname("BIPHOTON_GAMMA_RATIO");
    cmd->add_option("--e1", opts.e1, "Emitter 1 energy (absolute form)")->envname("BIPHOTON_E1");
    cmd->add_option("--e2", opts.e2, "Emitter 2 energy (absolute form)")->envname("BIPHOTON_E2");
    cmd->add_option("--gamma1", opts.gamma1, "Emitter 1 linewidth (absolute form)")
        ->envname("BIPHOTON_GAMMA1");
    cmd->add_option("--gamma2", opts.gamma2, "Emitter 2 linewidth (absolute form)")
        ->envname("BIPHOTON_GAMMA2");
    cmd->add_option("--beta", opts.beta, "Guided-coupling fraction Gamma/(Gamma+gamma)")
        ->envname("BIPHOTON_BETA");
    cmd->add_option("--beta2", opts.beta2, "Beta of emitter 2 (defaults to --beta)")
        ->envname("BIPHOTON_BETA2");
}

void add_sim_options(CLI::App* cmd, SimOpts& opts) {
    cmd->add_option("--omega", opts.omega, "Probe frequency, or \"auto\"")
        ->envname("BIPHOTON_OMEGA");
    cmd->add_option("--probe-mix", opts.probe_mix,
                    "Probe mixture, e.g. \"1,1:0.85;2,2:0.15\"")
        ->envname("BIPHOTON_PROBE_MIX");
    cmd->add_option("--detector", opts.detector, "threshold | number")
        ->envname("BIPHOTON_DETECTOR");
    cmd->add_option("--bitflip", opts.bitflip, "never | always | lossy-only")
        ->envname("BIPHOTON_BITFLIP");
    cmd->add_option("--seed", opts.seed, "Base RNG seed")->envname("BIPHOTON_SEED");
    cmd->add_option("--max-events", opts.max_events, "Detection events per trajectory")
        ->envname("BIPHOTON_MAX_EVENTS");
    cmd->add_option("--threshold", opts.threshold,
                    "Stop at this concurrence, or \"none\"")
        ->envname("BIPHOTON_THRESHOLD");
    cmd->add_option("--out", opts.out_dir, "Output directory")->envname("BIPHOTON_OUT");
}

EmitterPair resolve_pair(const EmitterOpts& opts) {
    const bool ratio_form = opts.delta.has_value() || opts.gamma_ratio.has_value();
    const bool absolute_form = opts.e1 || opts.e2 || opts.gamma1 || opts.gamma2;
    const double beta1 = opts.beta;
    const double beta2 = opts.beta2.value_or(opts.beta);

    if (ratio_form && absolute_form)
        throw InvalidConfig("give either --delta/--gamma-ratio or --e1/--e2/--gamma1/--gamma2");
    if (ratio_form) {
        if (!opts.delta || !opts.gamma_ratio)
            throw InvalidConfig("ratio form needs both --delta and --gamma-ratio");
        return pair_from_ratios(*opts.delta, *opts.gamma_ratio, beta1, beta2);
    }
    if (absolute_form) {
        if (!(opts.e1 && opts.e2 && opts.gamma1 && opts.gamma2))
            throw InvalidConfig("absolute form needs --e1, --e2, --gamma1 and --gamma2");
        if (!(*opts.gamma1 > 0.0 && *opts.gamma2 > 0.0))
            throw InvalidConfig("linewidths must be positive");
        return EmitterPair{make_emitter(*opts.e1, *opts.gamma1, beta1),
                           make_emitter(*opts.e2, *opts.gamma2, beta2)};
    }
    throw InvalidConfig("emitter parameters missing: use --delta/--gamma-ratio "
                        "or --e1/--e2/--gamma1/--gamma2");
}

SimulationConfig resolve_sim_config(const EmitterOpts& emitters, const SimOpts& opts) {
    SimulationConfig config;
    config.pair = resolve_pair(emitters);
    config.probe_mix = parse_probe_mix(opts.probe_mix);
    if (opts.detector == "threshold")
        config.detector = DetectorModel::Threshold;
    else if (opts.detector == "number" || opts.detector == "number-resolving")
        config.detector = DetectorModel::NumberResolving;
    else
        throw InvalidConfig("unknown detector model: " + opts.detector);
    if (opts.bitflip == "never")
        config.bit_flip = BitFlipPolicy::Never;
    else if (opts.bitflip == "always")
        config.bit_flip = BitFlipPolicy::Always;
    else if (opts.bitflip == "lossy-only")
        config.bit_flip = BitFlipPolicy::LossyOnly;
    else
        throw InvalidConfig("unknown bit-flip policy: " + opts.bitflip);
    config.max_events = opts.max_events;

    if (opts.omega == "auto") {
        config.omega.reset();
    } else {
        try {
            config.omega = std::stod(opts.omega);
        } catch (const std::exception&) {
            throw InvalidConfig("--omega must be a number or \"auto\"");
        }
    }
    if (opts.threshold == "none") {
        config.stop_threshold.reset();
    } else {
        try {
            config.stop_threshold = std::stod(opts.threshold);
        } catch (const std::exception&) {
            throw InvalidConfig("--threshold must be a number or \"none\"");
        }
    }
    config.validate_config();
    return config;
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ManifestOutput write_output(const fs::path& dir, const std::string& name,
                            std::string_view content) {
    fs::create_directories(dir);
    std::ofstream file(dir / name, std::ios::binary);
    if (!file)
        throw InvalidConfig("cannot write " + (dir / name).string());
    file.write(content.data(), static_cast<std::streamsize>(content.size()));
    file.close();
    return ManifestOutput{name, sha256_hex(content), content.size()};
}

void write_manifest(const fs::path& dir, std::string_view command,
                    const nlohmann::json& config, const std::vector<ManifestOutput>& outputs) {
    const nlohmann::json manifest = manifest_json(command, config, outputs, utc_now());
    std::ofstream file(dir / "run_manifest.json", std::ios::binary);
    file << manifest.dump(2) << '\n';
}

int cmd_freq(const EmitterOpts& emitters, const std::string& out_dir) {
    const EmitterPair pair = resolve_pair(emitters);
    const FrequencyCandidates candidates = candidate_frequencies(pair);
    const FrequencyCandidate selected = select_probe_frequency(pair, candidates);

    std::cout << "branch,omega,residual,selected\n";
    for (const auto& cand : candidates)
        std::cout << to_string(cand.branch) << ',' << format_number(cand.omega) << ','
                  << format_number(cand.residual) << ','
                  << ((cand.omega == selected.omega && cand.branch == selected.branch) ? 1 : 0)
                  << '\n';
    std::cout << "selected omega = " << format_number(selected.omega) << " ("
              << to_string(selected.branch) << ")\n";

    const fs::path dir(out_dir);
    std::vector<ManifestOutput> outputs;
    outputs.push_back(write_output(dir, "freq.csv", freq_csv(candidates, selected)));

    nlohmann::json config;
    config["emitters"] = {{"e1", pair.emitter1.energy},
                          {"gamma1", pair.emitter1.gamma_guided},
                          {"loss1", pair.emitter1.gamma_loss},
                          {"e2", pair.emitter2.energy},
                          {"gamma2", pair.emitter2.gamma_guided},
                          {"loss2", pair.emitter2.gamma_loss}};
    config["selected"] = {{"omega", selected.omega}, {"source", to_string(selected.branch)}};
    write_manifest(dir, "freq", config, outputs);
    return 0;
}

int cmd_trajectory(const EmitterOpts& emitters, const SimOpts& opts) {
    const SimulationConfig config = resolve_sim_config(emitters, opts);
    const ResolvedFrequency freq = resolve_frequency(config);
    const TrajectoryRecord record =
        run_trajectory(config, opts.seed, freq.omega, build_channels(config, freq.omega));

    const fs::path dir(opts.out_dir);
    std::vector<ManifestOutput> outputs;
    outputs.push_back(write_output(dir, "trajectory.csv", trajectory_csv(record)));

    nlohmann::json config_echo = config_json(config, freq);
    config_echo["seed"] = opts.seed;
    write_manifest(dir, "trajectory", config_echo, outputs);

    const double final_c = record.events.empty() ? 0.0 : record.events.back().concurrence;
    std::cout << "trajectory: " << record.events.size() << " events, final concurrence "
              << format_number(final_c) << " ("
              << (record.stop == StopReason::ThresholdReached ? "threshold_reached"
                                                              : "max_events")
              << ")\n";
    return 0;
}

int cmd_ensemble(const EmitterOpts& emitters, const SimOpts& opts) {
    if (opts.count < 1)
        throw InvalidConfig("--count must be >= 1");
    const SimulationConfig config = resolve_sim_config(emitters, opts);
    const ResolvedFrequency freq = resolve_frequency(config);
    SimulationConfig pinned = config;
    pinned.omega = freq.omega;
    const EnsembleSummary summary = run_ensemble(pinned, opts.seed, opts.count);

    const fs::path dir(opts.out_dir);
    std::vector<ManifestOutput> outputs;
    outputs.push_back(
        write_output(dir, "ensemble_quantiles.csv", ensemble_quantiles_csv(summary)));
    outputs.push_back(write_output(dir, "ensemble_stats.json",
                                   ensemble_stats_json(summary).dump(2) + "\n"));

    nlohmann::json config_echo = config_json(config, freq);
    config_echo["seed"] = opts.seed;
    config_echo["count"] = opts.count;
    write_manifest(dir, "ensemble", config_echo, outputs);

    std::cout << "ensemble: count " << summary.count << ", median events to threshold "
              << format_number(summary.median_events_to_threshold) << ", frac C>0.99 in 10 "
              << format_number(summary.frac_above_099_within_10) << ", frac reached "
              << format_number(summary.frac_reached_threshold) << "\n";
    return 0;
}

int cmd_sweep(const std::vector<double>& deltas, const std::vector<double>& gamma_ratios,
              const std::vector<double>& betas, const SimOpts& opts) {
    if (deltas.empty() || gamma_ratios.empty() || betas.empty())
        throw InvalidConfig("sweep needs --deltas, --gamma-ratios and --betas");
    if (opts.count < 1)
        throw InvalidConfig("--count must be >= 1");

    EmitterOpts placeholder;  // per-cell pairs come from the grid
    placeholder.delta = 0.0;
    placeholder.gamma_ratio = 1.0;
    SimulationConfig base = resolve_sim_config(placeholder, opts);

    const std::vector<SweepCell> cells =
        parameter_sweep(deltas, gamma_ratios, betas, base, opts.seed, opts.count);

    const fs::path dir(opts.out_dir);
    std::vector<ManifestOutput> outputs;
    outputs.push_back(write_output(dir, "sweep.csv", sweep_csv(cells)));

    nlohmann::json config_echo;
    config_echo["grid"] = {{"deltas", deltas}, {"gamma_ratios", gamma_ratios}, {"betas", betas}};
    config_echo["probe_mix"] = render_probe_mix(base.probe_mix);
    config_echo["detector"] = to_string(base.detector);
    config_echo["bit_flip_policy"] = to_string(base.bit_flip);
    config_echo["max_events"] = base.max_events;
    config_echo["stop_threshold"] =
        base.stop_threshold ? nlohmann::json(*base.stop_threshold) : nlohmann::json(nullptr);
    config_echo["omega"] = base.omega ? nlohmann::json(*base.omega) : nlohmann::json("auto");
    config_echo["seed"] = opts.seed;
    config_echo["count"] = opts.count;
    config_echo["rng"] = {{"generator", kRngIdentity}, {"seed_split", kSeedSplitIdentity}};
    write_manifest(dir, "sweep", config_echo, outputs);

    int failed = 0;
    for (const auto& cell : cells)
        if (!cell.summary) ++failed;
    std::cout << "sweep: " << cells.size() << " cells, " << failed << " failed\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heralded entanglement generation between two spectrally distinct "
                 "waveguide emitters probed by biphotons"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    EmitterOpts emitters;
    SimOpts sim;
    std::vector<double> deltas, gamma_ratios, betas;
    std::string config_file;

    const std::string config_help = "Key=value config file; command-line flags override it";

    CLI::App* freq = app.add_subcommand("freq", "Solve for degenerate probe frequencies");
    add_emitter_options(freq, emitters);
    std::string freq_out = ".";
    freq->add_option("--out", freq_out, "Output directory")->envname("BIPHOTON_OUT");
    freq->add_option("--config", config_file, config_help)->envname("BIPHOTON_CONFIG");

    CLI::App* trajectory =
        app.add_subcommand("trajectory", "Run a single seeded concurrence trajectory");
    add_emitter_options(trajectory, emitters);
    add_sim_options(trajectory, sim);
    trajectory->add_option("--config", config_file, config_help)->envname("BIPHOTON_CONFIG");

    CLI::App* ensemble = app.add_subcommand("ensemble", "Run a seeded trajectory ensemble");
    add_emitter_options(ensemble, emitters);
    add_sim_options(ensemble, sim);
    ensemble->add_option("--count", sim.count, "Number of trajectories")
        ->envname("BIPHOTON_COUNT");
    ensemble->add_option("--config", config_file, config_help)->envname("BIPHOTON_CONFIG");

    CLI::App* sweep = app.add_subcommand("sweep", "Sweep a delta x gamma-ratio x beta grid");
    add_sim_options(sweep, sim);
    sweep->add_option("--deltas", deltas, "Grid values for delta/Gamma1")
        ->delimiter(',')
        ->envname("BIPHOTON_DELTAS");
    sweep->add_option("--gamma-ratios", gamma_ratios, "Grid values for Gamma2/Gamma1")
        ->delimiter(',')
        ->envname("BIPHOTON_GAMMA_RATIOS");
    sweep->add_option("--betas", betas, "Grid values for beta")
        ->delimiter(',')
        ->envname("BIPHOTON_BETAS");
    sweep->add_option("--count", sim.count, "Trajectories per cell")
        ->envname("BIPHOTON_COUNT");
    sweep->add_option("--config", config_file, config_help)->envname("BIPHOTON_CONFIG");

    try {
        app.parse(argc, argv);

        std::vector<ConfigBinding> bindings;
        auto add_bindings = [&](std::vector<ConfigBinding> extra) {
            for (auto& binding : extra) bindings.push_back(std::move(binding));
        };
        if (freq->parsed()) {
            add_bindings(emitter_bindings(emitters));
            bindings.push_back(
                {"out", [&](const std::string& v) { freq_out = v; }});
            apply_config_file(freq, config_file, bindings);
            return cmd_freq(emitters, freq_out);
        }
        if (trajectory->parsed() || ensemble->parsed()) {
            CLI::App* cmd = trajectory->parsed() ? trajectory : ensemble;
            add_bindings(emitter_bindings(emitters));
            add_bindings(sim_bindings(sim));
            apply_config_file(cmd, config_file, bindings);
            return trajectory->parsed() ? cmd_trajectory(emitters, sim)
                                        : cmd_ensemble(emitters, sim);
        }
        if (sweep->parsed()) {
            add_bindings(sim_bindings(sim));
            bindings.push_back({"deltas", [&](const std::string& v) {
                                    deltas = parse_double_list("deltas", v);
                                }});
            bindings.push_back({"gamma-ratios", [&](const std::string& v) {
                                    gamma_ratios = parse_double_list("gamma-ratios", v);
                                }});
            bindings.push_back({"betas", [&](const std::string& v) {
                                    betas = parse_double_list("betas", v);
                                }});
            apply_config_file(sweep, config_file, bindings);
            return cmd_sweep(deltas, gamma_ratios, betas, sim);
        }
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}

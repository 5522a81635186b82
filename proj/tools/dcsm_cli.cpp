// Command-line front end: synthetic trace generation, link-budget
// evaluation, and full pass/ensemble simulation with report emission.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <json.hpp>

#include "dcsm/config.hpp"
#include "dcsm/report.hpp"
#include "dcsm/simulation.hpp"

namespace fs = std::filesystem;
using namespace dcsm;

namespace {

void write_file(const fs::path& path, const std::string& body) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << body;
}

int cmd_gen_trace(const SynthProfile& profile, std::uint64_t seed,
                  const std::string& out_path) {
    const auto trace = synth_trace(seed, profile);
    write_file(out_path, write_trace_csv(trace));

    double wet_max = 0.0, wet_sum = 0.0;
    for (double v : trace.wet_delay_cm) {
        wet_max = std::max(wet_max, v);
        wet_sum += v;
    }
    std::printf("wrote %s\n", out_path.c_str());
    std::printf("  samples:        %zu (1 s cadence)\n", trace.size());
    std::printf("  duration:       %lld s\n",
                static_cast<long long>(trace.duration_s()));
    std::printf("  wet delay mean: %.3f cm, max %.3f cm\n",
                wet_sum / static_cast<double>(trace.size()), wet_max);
    std::printf("  elevation peak: %.2f deg\n", profile.peak_elevation_deg);
    return 0;
}

int cmd_linkbudget(const LinkBudgetParams& params, double wet_delay_cm,
                   double elevation_deg, std::optional<double> t_op_override,
                   std::optional<double> attenuation_override, bool as_json) {
    auto state = atmosphere_from_wet_delay(params, wet_delay_cm, elevation_deg);
    if (attenuation_override) state.attenuation_db = *attenuation_override;
    if (t_op_override) {
        state.operating_temp_k = *t_op_override;
    } else if (attenuation_override) {
        state.operating_temp_k =
            operating_noise_temp(params, state.attenuation_db, elevation_deg);
    }
    const double p_r = received_power(params, state.attenuation_db);
    const double snr = bit_snr_db(params, p_r, state.operating_temp_k);

    const struct {
        const char* name;
        double value;
        const char* unit;
    } stages[7] = {
        {"opacity", state.opacity, "nepers"},
        {"sky_temp", state.sky_temp_k, "K"},
        {"atm_temp_31", state.atm_temp_31_k, "K"},
        {"atm_temp_32", state.atm_temp_32_k, "K"},
        {"attenuation", state.attenuation_db, "dB"},
        {"operating_temp", state.operating_temp_k, "K"},
        {"received_power", p_r, "W"},
    };

    if (as_json) {
        nlohmann::json j;
        j["stages"] = nlohmann::json::array();
        for (const auto& s : stages) {
            j["stages"].push_back(
                {{"name", s.name}, {"value", s.value}, {"unit", s.unit}});
        }
        j["bit_snr_db"] = snr;
        std::printf("%s\n", j.dump(2).c_str());
        return 0;
    }

    std::printf("%-16s %14s  %s\n", "stage", "value", "unit");
    for (const auto& s : stages) {
        std::printf("%-16s %14.6g  %s\n", s.name, s.value, s.unit);
    }
    std::printf("%-16s %14.4f  dB\n", "bit_snr", snr);
    return 0;
}

int cmd_simulate(RunConfig config, const std::string& out_dir,
                 const std::string& format) {
    const auto result = run_ensemble(config);

    const fs::path out(out_dir);
    if (format == "csv" || format == "both") {
        write_file(out / "reports.csv", reports_to_csv(result.reports));
    }
    if (format == "json" || format == "both") {
        write_file(out / "reports.json", ensemble_to_json(result, true).dump(2) + "\n");
    }

    // Plot data: predicted-vs-actual bit-SNR per pass and the per-method
    // delivery timelines.
    for (int pass = 0; pass < config.passes; ++pass) {
        const auto inputs = prepare_pass(config, make_trace(config, pass));
        write_file(out / ("snr_pass" + std::to_string(pass) + ".csv"),
                   snr_series_csv(inputs));
    }
    for (const auto& report : result.reports) {
        const std::string name = "delivery_pass" + std::to_string(report.pass_id) +
                                 "_" + report.method + "_" + report.y_policy + ".csv";
        write_file(out / name, delivery_timeline_csv(report));
    }

    std::printf("%-10s %-16s %10s %10s %10s %10s %8s\n", "method", "y_policy",
                "B_Tx_Gb", "D_Rcvd_Gb", "F_Tx", "F_Success", "acc%");
    for (const auto& s : result.summaries) {
        std::printf("%-10s %-16s %10.3f %10.3f %10.2f %10.2f %8.2f\n",
                    s.method.c_str(), s.y_policy.c_str(), s.mean_b_tx_gb,
                    s.mean_d_rcvd_gb, s.mean_f_tx, s.mean_f_rcvd_success,
                    s.mean_accuracy_pct);
    }
    std::printf("reports written to %s\n", out.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deep-space content-transfer simulator"};
    app.require_subcommand(1);

    // gen-trace
    auto* gen = app.add_subcommand("gen-trace", "Generate a synthetic pass trace CSV");
    SynthProfile profile;
    std::uint64_t gen_seed = 1;
    std::string gen_out = "trace.csv";
    gen->add_option("--seed", gen_seed, "Trace RNG seed");
    gen->add_option("--out", gen_out, "Output CSV path");
    gen->add_option("--duration", profile.duration_s, "Pass duration, s");
    gen->add_option("--peak-elevation", profile.peak_elevation_deg, "Peak elevation, deg");
    gen->add_option("--ou-mean", profile.ou_mean_cm, "Wet delay mean, cm");
    gen->add_option("--ou-reversion", profile.ou_reversion_time_s,
                    "Wet delay reversion time, s");
    gen->add_option("--ou-volatility", profile.ou_volatility_cm,
                    "Wet delay stationary sd, cm");
    gen->add_option("--storm-probability", profile.storm_probability,
                    "P(pass contains a storm)");

    // linkbudget
    auto* lb = app.add_subcommand("linkbudget", "Evaluate the bit-SNR pipeline stages");
    std::string lb_config;
    double wet_delay = 0.0, elevation = 90.0;
    std::optional<double> t_op_override, atten_override;
    bool lb_json = false;
    bool lb_physical = false;
    lb->add_option("--config", lb_config, "Run config supplying link parameters");
    lb->add_option("--wet-delay", wet_delay, "Zenith wet path delay, cm");
    lb->add_option("--elevation", elevation, "Antenna elevation, deg");
    lb->add_option("--t-op", t_op_override, "Override the operating noise temp, K");
    lb->add_option("--attenuation-db", atten_override, "Override the attenuation, dB");
    lb->add_flag("--json", lb_json, "Emit machine-readable stage values");
    lb->add_flag("--physical", lb_physical,
                 "Read the attenuation formula as a linear factor");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run the pass/ensemble simulation");
    std::string sim_config_path;
    std::string sim_out = "out";
    std::string sim_format = "both";
    std::optional<std::uint64_t> sim_seed;
    std::optional<int> sim_passes, sim_jobs;
    std::optional<std::string> sim_methods;
    sim->add_option("--config", sim_config_path, "Run configuration JSON")->required();
    sim->add_option("--out", sim_out, "Output directory");
    sim->add_option("--format", sim_format, "Reports to write: json|csv|both")
        ->check(CLI::IsMember({"json", "csv", "both"}));
    sim->add_option("--seed", sim_seed, "Master seed override");
    sim->add_option("--passes", sim_passes, "Pass count override");
    sim->add_option("--jobs", sim_jobs, "Worker threads for the ensemble");
    sim->add_option("--methods", sim_methods,
                    "Comma-separated method list override, e.g. "
                    "dcsm:fixed_ymin,static1:fixed_ymin");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) {
            return cmd_gen_trace(profile, gen_seed, gen_out);
        }
        if (lb->parsed()) {
            LinkBudgetParams params;
            if (!lb_config.empty()) params = load_run_config(lb_config).link;
            if (lb_physical) {
                params.attenuation_interpretation = AttenuationInterpretation::kPhysical;
            }
            return cmd_linkbudget(params, wet_delay, elevation, t_op_override,
                                  atten_override, lb_json);
        }
        if (sim->parsed()) {
            RunConfig config = load_run_config(sim_config_path);
            if (sim_seed) config.master_seed = *sim_seed;
            if (sim_passes) config.passes = *sim_passes;
            if (sim_jobs) config.jobs = *sim_jobs;
            if (sim_methods) {
                config.methods.clear();
                std::string list = *sim_methods;
                std::size_t start = 0;
                while (start <= list.size()) {
                    const auto comma = list.find(',', start);
                    const auto token =
                        list.substr(start, comma == std::string::npos
                                               ? std::string::npos
                                               : comma - start);
                    if (!token.empty()) config.methods.push_back(MethodSpec::parse(token));
                    if (comma == std::string::npos) break;
                    start = comma + 1;
                }
            }
            config.validate();
            return cmd_simulate(std::move(config), sim_out, sim_format);
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dcsm/simulation.hpp"

namespace dcsm {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

/// Strict object reader: every key must be consumed.
class ObjectReader {
  public:
    ObjectReader(const nlohmann::json& obj, std::string path)
        : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) {
            throw ConfigError("config: " + path_ + " must be an object");
        }
    }

    ~ObjectReader() noexcept(false) {
        if (std::uncaught_exceptions() > 0) return;
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!seen_.contains(it.key())) {
                throw ConfigError("config: unknown key '" + path_ + "." + it.key() + "'");
            }
        }
    }

    bool has(const std::string& key) {
        if (obj_.contains(key)) {
            seen_.insert(key);
            return true;
        }
        return false;
    }

    template <typename T>
    void read(const std::string& key, T& target) {
        if (!has(key)) return;
        try {
            target = obj_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("config: bad value for '" + path_ + "." + key + "'");
        }
    }

    const nlohmann::json* object(const std::string& key) {
        if (!has(key)) return nullptr;
        return &obj_.at(key);
    }

    std::string path() const { return path_; }

  private:
    const nlohmann::json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

inline void read_link(const nlohmann::json& j, const std::string& path,
                      LinkBudgetParams& link) {
    ObjectReader r(j, path);
    r.read("transmit_power_w", link.transmit_power_w);
    r.read("transmit_gain_dbi", link.transmit_gain_dbi);
    r.read("receive_gain_dbi", link.receive_gain_dbi);
    r.read("modulation_index_deg", link.modulation_index_deg);
    r.read("channel_rate_bps", link.channel_rate_bps);
    r.read("carrier_freq_hz", link.carrier_freq_hz);
    r.read("distance_m", link.distance_m);
    r.read("antenna_noise_t1_k", link.antenna_noise_t1_k);
    r.read("antenna_noise_t2_k", link.antenna_noise_t2_k);
    r.read("antenna_noise_decay_per_deg", link.antenna_noise_decay_per_deg);
    r.read("cumulative_distribution", link.cumulative_distribution);
    r.read("crc_enabled", link.crc_enabled);
    r.read("opacity_base", link.opacity_base);
    r.read("opacity_per_cm", link.opacity_per_cm);
    if (r.has("attenuation_interpretation")) {
        const auto text = j.at("attenuation_interpretation").get<std::string>();
        if (text == "paper") {
            link.attenuation_interpretation = AttenuationInterpretation::kPaper;
        } else if (text == "physical") {
            link.attenuation_interpretation = AttenuationInterpretation::kPhysical;
        } else {
            throw ConfigError("config: attenuation_interpretation must be "
                              "'paper' or 'physical'");
        }
    }
}

inline void read_synth(const nlohmann::json& j, SynthProfile& profile) {
    ObjectReader r(j, "trace.synthetic");
    r.read("duration_s", profile.duration_s);
    r.read("peak_elevation_deg", profile.peak_elevation_deg);
    r.read("ou_mean_cm", profile.ou_mean_cm);
    r.read("ou_reversion_time_s", profile.ou_reversion_time_s);
    r.read("ou_volatility_cm", profile.ou_volatility_cm);
    r.read("storm_probability", profile.storm_probability);
    r.read("storm_peak_cm_min", profile.storm_peak_cm_min);
    r.read("storm_peak_cm_max", profile.storm_peak_cm_max);
    r.read("storm_duration_s_min", profile.storm_duration_s_min);
    r.read("storm_duration_s_max", profile.storm_duration_s_max);
    r.read("distance_m", profile.distance_m);
}

inline void read_calibration(const nlohmann::json& j, FerCalibration& calib) {
    ObjectReader r(j, "calibration");
    double slope = calib.slope_per_db;
    double floor = calib.floor;
    r.read("fer_slope_per_db", slope);
    r.read("fer_floor", floor);
    if (slope != calib.slope_per_db || floor != calib.floor) {
        // Midpoints and the B..D range averages depend on the curve shape;
        // re-derive them for the overridden slope/floor. The Range-E knob
        // and p_target survive the rebuild.
        const double p_target = calib.p_target;
        const double range_avg_e = calib.range_avg_fer[3];
        calib = FerCalibration::defaults(slope, floor);
        calib.p_target = p_target;
        calib.range_avg_fer[3] = range_avg_e;
    }
    r.read("p_target", calib.p_target);
    if (const auto* mids = r.object("fer_midpoints_db")) {
        ObjectReader blocks(*mids, "calibration.fer_midpoints_db");
        for (std::size_t b = 0; b < kCcsdsBlockLengths.size(); ++b) {
            const std::string key = std::to_string(kCcsdsBlockLengths[b]);
            if (const auto* per_rate = blocks.object(key)) {
                ObjectReader rates(*per_rate, "calibration.fer_midpoints_db." + key);
                for (std::size_t ri = 0; ri < kCcsdsRates.size(); ++ri) {
                    rates.read(std::to_string(kCcsdsRates[ri].den),
                               calib.midpoints_db[b][ri]);
                }
            }
        }
    }
    if (const auto* avg = r.object("range_avg_fer")) {
        ObjectReader ranges(*avg, "calibration.range_avg_fer");
        ranges.read("B", calib.range_avg_fer[0]);
        ranges.read("C", calib.range_avg_fer[1]);
        ranges.read("D", calib.range_avg_fer[2]);
        ranges.read("E", calib.range_avg_fer[3]);
    }
}

}  // namespace detail

/// Parse a run configuration document; unknown keys are rejected.
inline RunConfig parse_run_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
    }

    RunConfig config;
    detail::ObjectReader root(j, "");
    if (const auto* link = root.object("link")) {
        detail::read_link(*link, "link", config.link);
    }
    if (const auto* plink = root.object("predictor_link")) {
        LinkBudgetParams assumed = config.link;
        detail::read_link(*plink, "predictor_link", assumed);
        config.predictor_link = assumed;
    }
    if (const auto* pred = root.object("prediction")) {
        detail::ObjectReader r(*pred, "prediction");
        r.read("sky_window_s", config.prediction.sky_window_s);
        r.read("fit_window_s", config.prediction.fit_window_s);
        r.read("refit_interval_s", config.prediction.refit_interval_s);
        r.read("min_fit_samples", config.prediction.min_fit_samples);
        r.read("feed_corrected_error", config.prediction.feed_corrected_error);
    }
    if (const auto* sim = root.object("simulation")) {
        detail::ObjectReader r(*sim, "simulation");
        r.read("rtt_s", config.rtt_s);
        r.read("file_size_bytes", config.file_size_bytes);
        r.read("theta", config.theta);
        r.read("passes", config.passes);
        r.read("master_seed", config.master_seed);
        r.read("jobs", config.jobs);
        r.read("genie2_epsilon", config.genie2_epsilon);
        if (r.has("methods")) {
            config.methods.clear();
            for (const auto& name : sim->at("methods")) {
                config.methods.push_back(MethodSpec::parse(name.get<std::string>()));
            }
        }
    }
    if (const auto* trace = root.object("trace")) {
        detail::ObjectReader r(*trace, "trace");
        std::string source = "synthetic";
        r.read("source", source);
        if (source == "synthetic") {
            config.trace_source.kind = TraceSource::Kind::kSynthetic;
        } else if (source == "csv") {
            config.trace_source.kind = TraceSource::Kind::kCsv;
        } else {
            throw ConfigError("config: trace.source must be 'synthetic' or 'csv'");
        }
        if (const auto* synth = r.object("synthetic")) {
            detail::read_synth(*synth, config.trace_source.profile);
        }
        if (r.has("csv_paths")) {
            for (const auto& path : trace->at("csv_paths")) {
                std::ifstream in(path.get<std::string>());
                if (!in) {
                    throw ConfigError("config: cannot open trace file '" +
                                      path.get<std::string>() + "'");
                }
                std::ostringstream body;
                body << in.rdbuf();
                config.trace_source.csv_texts.push_back(body.str());
            }
        }
    }
    if (const auto* calib = root.object("calibration")) {
        detail::read_calibration(*calib, config.calib);
    }

    try {
        config.validate();
        config.trace_source.profile.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return config;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream body;
    body << in.rdbuf();
    return parse_run_config(body.str());
}

}  // namespace dcsm

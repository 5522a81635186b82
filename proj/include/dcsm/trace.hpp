#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dcsm/rng.hpp"
#include "dcsm/spline.hpp"

namespace dcsm {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kTraceCsvHeader =
    "time_s,wet_delay_cm,elevation_deg,azimuth_deg";

/// One archive-style measurement row.
struct TraceSample {
    double time_s = 0.0;
    double wet_delay_cm = 0.0;
    double elevation_deg = 0.0;
    double azimuth_deg = 0.0;  // recorded for format fidelity, unused downstream
};

/// Raw pass measurements, nominally one row every 30 s.
struct RawTrace {
    std::vector<TraceSample> samples;
    double nominal_period_s = 30.0;

    void validate() const {
        if (samples.size() < 4) {
            throw ValidationError("trace: need at least 4 samples for a cubic spline");
        }
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto& s = samples[i];
            if (i > 0 && !(s.time_s > samples[i - 1].time_s)) {
                throw ValidationError("trace: timestamps must strictly increase (row " +
                                      std::to_string(i + 2) + ")");
            }
            if (!(s.elevation_deg > 0.0 && s.elevation_deg <= 90.0)) {
                throw ValidationError("trace: elevation outside (0, 90] (row " +
                                      std::to_string(i + 2) + ")");
            }
            if (s.wet_delay_cm < 0.0) {
                throw ValidationError("trace: negative wet delay (row " +
                                      std::to_string(i + 2) + ")");
            }
        }
    }
};

/// Resampled pass on a contiguous 1 s grid, t = 0..T_e.
struct PassTrace {
    std::vector<double> wet_delay_cm;
    std::vector<double> elevation_deg;
    double distance_m = 18.0e10;  // constant over a pass

    std::int64_t duration_s() const {
        return static_cast<std::int64_t>(wet_delay_cm.size()) - 1;
    }
    std::size_t size() const { return wet_delay_cm.size(); }
};

namespace detail {
inline double parse_field(std::string_view text, int line_no) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError("trace: malformed number '" + std::string(text) + "' on line " +
                         std::to_string(line_no));
    }
    return value;
}
}  // namespace detail

/// Parse the archive CSV format. Errors carry 1-based line numbers.
inline RawTrace parse_trace(std::string_view text) {
    RawTrace trace;
    std::size_t pos = 0;
    int line_no = 0;
    bool saw_header = false;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(
            pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        if (!saw_header) {
            if (line != kTraceCsvHeader) {
                throw ParseError("trace: missing header '" + std::string(kTraceCsvHeader) +
                                 "' on line 1");
            }
            saw_header = true;
            continue;
        }

        TraceSample sample;
        double* fields[4] = {&sample.time_s, &sample.wet_delay_cm,
                             &sample.elevation_deg, &sample.azimuth_deg};
        std::size_t start = 0;
        for (int f = 0; f < 4; ++f) {
            const std::size_t comma = line.find(',', start);
            const bool last = f == 3;
            if (last != (comma == std::string_view::npos)) {
                throw ParseError("trace: expected 4 fields on line " +
                                 std::to_string(line_no));
            }
            const std::string_view cell =
                last ? line.substr(start) : line.substr(start, comma - start);
            *fields[f] = detail::parse_field(cell, line_no);
            start = comma + 1;
        }
        trace.samples.push_back(sample);
    }
    if (!saw_header) throw ParseError("trace: empty input");
    trace.validate();
    return trace;
}

/// Resample a raw trace onto a uniform grid (1 s by default) with an
/// interpolating cubic B-spline; wet delay is floored at zero between knots.
inline PassTrace bspline_resample(const RawTrace& raw, double period_s = 1.0,
                                  SplineBoundary boundary = SplineBoundary::kNotAKnot,
                                  double distance_m = 18.0e10) {
    if (!(period_s > 0.0)) throw std::domain_error("bspline_resample: period must be > 0");
    raw.validate();

    std::vector<double> t, wet, elev;
    t.reserve(raw.samples.size());
    for (const auto& s : raw.samples) {
        t.push_back(s.time_s);
        wet.push_back(s.wet_delay_cm);
        elev.push_back(s.elevation_deg);
    }
    const CubicSpline wet_spline(t, wet, boundary);
    const CubicSpline elev_spline(t, elev, boundary);

    const double span = t.back() - t.front();
    const auto steps = static_cast<std::int64_t>(std::floor(span / period_s + 1e-9));
    PassTrace out;
    out.distance_m = distance_m;
    out.wet_delay_cm.reserve(steps + 1);
    out.elevation_deg.reserve(steps + 1);
    for (std::int64_t k = 0; k <= steps; ++k) {
        const double tk = t.front() + static_cast<double>(k) * period_s;
        out.wet_delay_cm.push_back(std::max(0.0, wet_spline(tk)));
        out.elevation_deg.push_back(std::clamp(elev_spline(tk), 1e-6, 90.0));
    }
    return out;
}

/// Synthetic-pass generator profile. Wet delay follows a mean-reverting
/// process with occasional raised-cosine storm bumps; elevation follows a
/// sinusoidal half-arc from 10 degrees up to the peak and back.
struct SynthProfile {
    double duration_s = 21600.0;
    double peak_elevation_deg = 88.0;
    double ou_mean_cm = 7.0;
    double ou_reversion_time_s = 2400.0;
    double ou_volatility_cm = 2.0;  // stationary standard deviation
    double storm_probability = 0.45;  // P(pass contains at least one storm)
    double storm_peak_cm_min = 10.0;
    double storm_peak_cm_max = 30.0;
    double storm_duration_s_min = 2400.0;
    double storm_duration_s_max = 4800.0;
    double distance_m = 18.0e10;

    void validate() const {
        if (!(duration_s >= 600.0)) {
            throw std::domain_error("synth profile: duration must be >= 600 s");
        }
        if (!(peak_elevation_deg > 0.0 && peak_elevation_deg <= 90.0)) {
            throw std::domain_error("synth profile: peak elevation outside (0, 90]");
        }
        if (ou_mean_cm < 0.0 || ou_volatility_cm < 0.0 || ou_reversion_time_s <= 0.0) {
            throw std::domain_error("synth profile: bad wet-delay process parameters");
        }
        if (!(storm_probability >= 0.0 && storm_probability < 1.0)) {
            throw std::domain_error("synth profile: storm probability outside [0, 1)");
        }
    }
};

inline PassTrace synth_trace(std::uint64_t seed, const SynthProfile& profile) {
    profile.validate();
    const auto n = static_cast<std::int64_t>(profile.duration_s);
    Rng rng(splitmix64(seed));

    // Storm bumps first so the draw layout is independent of the path length.
    struct Storm {
        double center_s, peak_cm, duration_s;
    };
    std::vector<Storm> storms;
    const double rate = -std::log1p(-profile.storm_probability);
    const int count = rng.poisson(rate);
    for (int i = 0; i < count; ++i) {
        Storm s;
        s.center_s = rng.uniform(0.1, 0.9) * profile.duration_s;
        s.peak_cm = rng.uniform(profile.storm_peak_cm_min, profile.storm_peak_cm_max);
        s.duration_s =
            rng.uniform(profile.storm_duration_s_min, profile.storm_duration_s_max);
        storms.push_back(s);
    }

    PassTrace out;
    out.distance_m = profile.distance_m;
    out.wet_delay_cm.resize(n + 1);
    out.elevation_deg.resize(n + 1);

    const double decay = std::exp(-1.0 / profile.ou_reversion_time_s);
    const double step_sd =
        profile.ou_volatility_cm * std::sqrt(1.0 - decay * decay);
    double level = profile.ou_mean_cm + profile.ou_volatility_cm * rng.normal();

    for (std::int64_t t = 0; t <= n; ++t) {
        double bump = 0.0;
        for (const auto& s : storms) {
            const double offset = std::abs(static_cast<double>(t) - s.center_s);
            if (offset < 0.5 * s.duration_s) {
                bump += s.peak_cm * 0.5 *
                        (1.0 + std::cos(2.0 * std::numbers::pi * offset / s.duration_s));
            }
        }
        out.wet_delay_cm[t] = std::max(0.0, level + bump);
        out.elevation_deg[t] =
            10.0 + (profile.peak_elevation_deg - 10.0) *
                       std::sin(std::numbers::pi * static_cast<double>(t) / n);
        out.elevation_deg[t] = std::clamp(out.elevation_deg[t], 1e-6, 90.0);
        level = profile.ou_mean_cm + (level - profile.ou_mean_cm) * decay +
                step_sd * rng.normal();
    }
    return out;
}

namespace detail {
inline void append_double(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}
}  // namespace detail

/// Serialize a 1 s pass back to the archive CSV format (round-trip exact).
inline std::string write_trace_csv(const PassTrace& trace) {
    std::string out(kTraceCsvHeader);
    out.push_back('\n');
    for (std::size_t t = 0; t < trace.size(); ++t) {
        detail::append_double(out, static_cast<double>(t));
        out.push_back(',');
        detail::append_double(out, trace.wet_delay_cm[t]);
        out.push_back(',');
        detail::append_double(out, trace.elevation_deg[t]);
        out.append(",0\n");
    }
    return out;
}

}  // namespace dcsm

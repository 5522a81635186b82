#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcsm/math.hpp"

namespace dcsm {

/// How the slant attenuation formula's output is read. The source relation
/// (T_p / (T_p - T_atm)) / sin(theta_e) is used downstream as a dB quantity
/// through 10^(L/10); `kPaper` keeps that reading verbatim (a transparent
/// atmosphere then costs 1 dB), `kPhysical` treats the value as the linear
/// attenuation factor instead.
enum class AttenuationInterpretation { kPaper, kPhysical };

struct LinkBudgetParams {
    double transmit_power_w = 34.0;
    double transmit_gain_dbi = 56.4;
    double receive_gain_dbi = 79.0;
    double modulation_index_deg = 21.09375;
    double channel_rate_bps = 3.0e6;  // BPSK: symbols/s == bits/s
    double carrier_freq_hz = 32.0e9;
    double distance_m = 18.0e10;

    // Antenna-microwave noise: T1 + T2 * exp(-a * theta_e).
    double antenna_noise_t1_k = 14.0;
    double antenna_noise_t2_k = 10.0;
    double antenna_noise_decay_per_deg = 0.1;

    // Weather cumulative distribution in [0, 0.99]; sets the mean radiating
    // temperature T_M = 255 + 25 * CD.
    double cumulative_distribution = 0.5;

    bool crc_enabled = false;

    // Affine wet-path-delay -> opacity map (calibration inputs; the source
    // measurement curve is not public).
    double opacity_base = 0.035;     // nepers at zero wet delay
    double opacity_per_cm = 0.004;   // nepers per cm

    AttenuationInterpretation attenuation_interpretation =
        AttenuationInterpretation::kPaper;

    double mean_radiating_temp_k() const {
        return 255.0 + 25.0 * cumulative_distribution;
    }

    void validate() const {
        if (!(transmit_power_w > 0.0)) throw std::domain_error("link: P_T must be > 0");
        if (!(channel_rate_bps > 0.0)) throw std::domain_error("link: R_b must be > 0");
        if (!(carrier_freq_hz > 0.0)) throw std::domain_error("link: f must be > 0");
        if (!(distance_m > 0.0)) throw std::domain_error("link: D must be > 0");
        if (!(modulation_index_deg > 0.0 && modulation_index_deg < 90.0)) {
            throw std::domain_error("link: modulation index must lie in (0, 90) deg");
        }
        if (!(cumulative_distribution >= 0.0 && cumulative_distribution <= 0.99)) {
            throw std::domain_error("link: CD must lie in [0, 0.99]");
        }
        if (opacity_base < 0.0 || opacity_per_cm < 0.0) {
            throw std::domain_error("link: opacity coefficients must be >= 0");
        }
    }
};

/// Per-sample derived atmospheric quantities, one pipeline stage each.
struct AtmosphereState {
    double wet_delay_cm = 0.0;
    double opacity = 0.0;            // nepers, 31.4 GHz water vapor
    double sky_temp_k = 0.0;         // zenith, 31.4 GHz
    double atm_temp_31_k = 0.0;      // zenith, 31.4 GHz
    double atm_temp_32_k = 0.0;      // zenith, 32 GHz
    double attenuation_db = 0.0;     // slant, 32 GHz
    double operating_temp_k = 0.0;   // system T_op
};

inline double opacity_from_wet_delay(double wet_delay_cm, double base = 0.035,
                                     double per_cm = 0.004) {
    if (wet_delay_cm < 0.0) {
        throw std::domain_error("opacity_from_wet_delay: negative wet delay");
    }
    return base + per_cm * wet_delay_cm;
}

/// T_sky = 275 - 272 exp(-tau), kelvin.
inline double sky_temp_from_opacity(double opacity) {
    if (opacity < 0.0) throw std::domain_error("sky_temp_from_opacity: tau < 0");
    return 275.0 - 272.0 * std::exp(-opacity);
}

/// Zenith atmospheric noise temperature at 31.4 GHz from sky temperature.
inline double atm_temp_31(double sky_temp_k) {
    if (sky_temp_k < kCosmicBackgroundK) {
        throw std::domain_error("atm_temp_31: T_sky below cosmic background");
    }
    return kAtmospherePhysicalK * (sky_temp_k - kCosmicBackgroundK) /
           (kAtmospherePhysicalK - kCosmicBackgroundK);
}

/// 31.4 GHz -> 32 GHz noise temperature transfer.
inline double atm_temp_32(double atm_temp_31_k) {
    if (atm_temp_31_k < 0.0) throw std::domain_error("atm_temp_32: T_atm < 0");
    return atm_temp_31_k + 5.0 * (1.0 - std::exp(-0.008 * atm_temp_31_k));
}

/// Slant attenuation (T_p / (T_p - T_atm)) / sin(theta_e), evaluated
/// verbatim; the result is read per the configured interpretation.
inline double atm_attenuation(double atm_temp_k, double elevation_deg) {
    if (elevation_deg <= 0.0 || elevation_deg > 90.0) {
        throw std::domain_error("atm_attenuation: elevation must lie in (0, 90] deg");
    }
    if (atm_temp_k < 0.0) throw std::domain_error("atm_attenuation: T_atm < 0");
    if (atm_temp_k >= kAtmospherePhysicalK) {
        throw std::domain_error("atm_attenuation: saturated atmosphere (T_atm >= 275 K)");
    }
    return (kAtmospherePhysicalK / (kAtmospherePhysicalK - atm_temp_k)) /
           std::sin(deg_to_rad(elevation_deg));
}

inline double attenuation_db_from_raw(double raw,
                                      AttenuationInterpretation interp) {
    return interp == AttenuationInterpretation::kPaper ? raw : linear_to_db(raw);
}

/// System operating noise temperature:
/// T_op = [T1 + T2 e^(-a theta)] + T_M (1 - 1/L) + T_cmc / L, L = 10^(L_db/10).
inline double operating_noise_temp(const LinkBudgetParams& params,
                                   double attenuation_db, double elevation_deg) {
    if (attenuation_db < 0.0) {
        throw std::domain_error("operating_noise_temp: attenuation must be >= 0 dB");
    }
    const double loss = db_to_linear(attenuation_db);
    const double antenna = params.antenna_noise_t1_k +
                           params.antenna_noise_t2_k *
                               std::exp(-params.antenna_noise_decay_per_deg *
                                        elevation_deg);
    const double atm = params.mean_radiating_temp_k() * (1.0 - 1.0 / loss);
    const double cosmic = kCosmicBackgroundK / loss;
    return antenna + atm + cosmic;
}

/// Received power P_R = P_T G_T (c / (4 pi f D))^2 G_R / L, watts.
inline double received_power(const LinkBudgetParams& params, double attenuation_db) {
    params.validate();
    if (attenuation_db < 0.0) {
        throw std::domain_error("received_power: attenuation must be >= 0 dB");
    }
    const double gain_tx = db_to_linear(params.transmit_gain_dbi);
    const double gain_rx = db_to_linear(params.receive_gain_dbi);
    const double spreading =
        kSpeedOfLight /
        (4.0 * std::numbers::pi * params.carrier_freq_hz * params.distance_m);
    return params.transmit_power_w * gain_tx * spreading * spreading * gain_rx /
           db_to_linear(attenuation_db);
}

/// Channel bit-SNR, E_b/N_0 = P_R sin^2(theta_m) / (K_b T_op R_b), in dB.
inline double bit_snr_db(const LinkBudgetParams& params, double received_power_w,
                         double operating_temp_k) {
    if (!(received_power_w > 0.0)) throw std::domain_error("bit_snr: P_R must be > 0");
    if (!(operating_temp_k > 0.0)) throw std::domain_error("bit_snr: T_op must be > 0");
    const double s = std::sin(deg_to_rad(params.modulation_index_deg));
    const double linear = received_power_w * s * s /
                          (kBoltzmann * operating_temp_k * params.channel_rate_bps);
    return linear_to_db(linear);
}

inline AtmosphereState atmosphere_from_sky_temp(const LinkBudgetParams& params,
                                                double sky_temp_k,
                                                double elevation_deg) {
    AtmosphereState st;
    st.sky_temp_k = sky_temp_k;
    st.atm_temp_31_k = atm_temp_31(sky_temp_k);
    st.atm_temp_32_k = atm_temp_32(st.atm_temp_31_k);
    const double raw = atm_attenuation(st.atm_temp_32_k, elevation_deg);
    st.attenuation_db =
        attenuation_db_from_raw(raw, params.attenuation_interpretation);
    st.operating_temp_k =
        operating_noise_temp(params, st.attenuation_db, elevation_deg);
    return st;
}

inline AtmosphereState atmosphere_from_wet_delay(const LinkBudgetParams& params,
                                                 double wet_delay_cm,
                                                 double elevation_deg) {
    const double tau =
        opacity_from_wet_delay(wet_delay_cm, params.opacity_base, params.opacity_per_cm);
    AtmosphereState st =
        atmosphere_from_sky_temp(params, sky_temp_from_opacity(tau), elevation_deg);
    st.wet_delay_cm = wet_delay_cm;
    st.opacity = tau;
    return st;
}

inline double snr_from_state(const LinkBudgetParams& params,
                             const AtmosphereState& st) {
    return bit_snr_db(params, received_power(params, st.attenuation_db),
                      st.operating_temp_k);
}

inline double snr_from_wet_delay(const LinkBudgetParams& params, double wet_delay_cm,
                                 double elevation_deg) {
    return snr_from_state(params,
                          atmosphere_from_wet_delay(params, wet_delay_cm, elevation_deg));
}

inline double snr_from_sky_temp(const LinkBudgetParams& params, double sky_temp_k,
                                double elevation_deg) {
    return snr_from_state(params,
                          atmosphere_from_sky_temp(params, sky_temp_k, elevation_deg));
}

/// Per-second channel bit-SNR over a pass.
struct BitSnrSeries {
    std::vector<double> snr_db;

    std::size_t size() const { return snr_db.size(); }
    double operator[](std::size_t i) const { return snr_db[i]; }
};

/// Full wet-delay -> bit-SNR pipeline over aligned 1 s series.
inline BitSnrSeries snr_pipeline(const LinkBudgetParams& params,
                                 std::span<const double> wet_delay_cm,
                                 std::span<const double> elevation_deg) {
    if (wet_delay_cm.size() != elevation_deg.size()) {
        throw std::invalid_argument("snr_pipeline: series lengths differ");
    }
    params.validate();
    BitSnrSeries out;
    out.snr_db.reserve(wet_delay_cm.size());
    for (std::size_t i = 0; i < wet_delay_cm.size(); ++i) {
        out.snr_db.push_back(
            snr_from_wet_delay(params, wet_delay_cm[i], elevation_deg[i]));
    }
    return out;
}

}  // namespace dcsm

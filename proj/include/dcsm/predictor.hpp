#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dcsm/coding.hpp"
#include "dcsm/link_budget.hpp"
#include "dcsm/trace.hpp"

namespace dcsm {

/// Arithmetic mean of the most recent min(window, available) samples.
inline double sliding_sky_mean(std::span<const double> history, int window) {
    if (window < 1) throw std::domain_error("sliding_sky_mean: window must be >= 1");
    if (history.empty()) throw std::domain_error("sliding_sky_mean: empty history");
    const std::size_t take = std::min<std::size_t>(window, history.size());
    double sum = 0.0;
    for (std::size_t i = history.size() - take; i < history.size(); ++i) {
        sum += history[i];
    }
    return sum / static_cast<double>(take);
}

/// AR(1) model x_t = c + a x_{t-1} + eps in mean-reversion form:
/// long-term mean mu = c / (1 - a), reversion rate phi = 1 - a.
struct Ar1Params {
    double long_term_mean = 0.0;
    double ar_coeff = 0.0;  // |ar_coeff| < 1 once fitted
    double innovation_variance = 0.0;

    double reversion_rate() const { return 1.0 - ar_coeff; }
};

/// Lag-1 least-squares (Yule-Walker) fit around the sample mean.
inline Ar1Params fit_ar1(std::span<const double> series) {
    if (series.size() < 30) throw std::domain_error("fit_ar1: need at least 30 samples");
    const std::size_t n = series.size();
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);

    double num = 0.0, den = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        num += (series[i] - mean) * (series[i - 1] - mean);
    }
    for (std::size_t i = 0; i < n; ++i) {
        den += (series[i] - mean) * (series[i] - mean);
    }
    if (den <= 1e-12 * static_cast<double>(n)) {
        throw std::domain_error("fit_ar1: series is constant");
    }

    Ar1Params params;
    params.long_term_mean = mean;
    params.ar_coeff = std::clamp(num / den, -0.999, 0.999);
    double resid = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double eps = (series[i] - mean) - params.ar_coeff * (series[i - 1] - mean);
        resid += eps * eps;
    }
    params.innovation_variance = resid / static_cast<double>(n - 1);
    return params;
}

/// E[x_{t+n} | x_t] = mu (1 - (1-phi)^n) + x_t (1-phi)^n.
inline double ar1_forecast(double x_t, const Ar1Params& params, std::int64_t n) {
    if (n < 0) throw std::domain_error("ar1_forecast: negative horizon");
    const double decay = std::pow(params.ar_coeff, static_cast<double>(n));
    return params.long_term_mean * (1.0 - decay) + x_t * decay;
}

struct PredictorConfig {
    int sky_window_s = 10;        // N of the a-priori sliding average
    std::int64_t rtt_s = 1200;
    int fit_window_s = 600;       // rolling error window for the AR(1) fit
    int refit_interval_s = 60;
    int min_fit_samples = 30;
    // Whether the error is measured against the pristine preliminary value
    // (false) or against the one-step-corrected estimate (true). With the
    // corrected feed, a persistent preliminary bias b equilibrates at a
    // residual of b/(1+a) instead of vanishing.
    bool feed_corrected_error = false;
};

/// Measured zenith sky temperature over a pass.
inline std::vector<double> sky_temp_series(const PassTrace& trace,
                                           const LinkBudgetParams& params) {
    std::vector<double> out;
    out.reserve(trace.size());
    for (double wet : trace.wet_delay_cm) {
        out.push_back(sky_temp_from_opacity(
            opacity_from_wet_delay(wet, params.opacity_base, params.opacity_per_cm)));
    }
    return out;
}

/// Actual channel bit-SNR over a pass (the trace's distance applies).
inline BitSnrSeries actual_snr_series(const PassTrace& trace,
                                      const LinkBudgetParams& params) {
    LinkBudgetParams p = params;
    p.distance_m = trace.distance_m;
    return snr_pipeline(p, trace.wet_delay_cm, trace.elevation_deg);
}

/// A-priori phase: the RTT-ahead bit-SNR estimate X_hat, built from the
/// sliding sky-temperature average and the known elevation profile. Horizons
/// inside the first RTT fall back to the earliest available window.
inline BitSnrSeries preliminary_predict(const PassTrace& trace,
                                        const LinkBudgetParams& params,
                                        std::int64_t rtt_s, int sky_window = 10) {
    if (rtt_s < 0) throw std::domain_error("preliminary_predict: negative RTT");
    LinkBudgetParams p = params;
    p.distance_m = trace.distance_m;
    const auto sky = sky_temp_series(trace, p);
    const auto n = static_cast<std::int64_t>(trace.size());

    // Rolling window sums over the sky series.
    std::vector<double> smoothed(sky.size());
    double acc = 0.0;
    for (std::int64_t t = 0; t < n; ++t) {
        acc += sky[t];
        if (t >= sky_window) acc -= sky[t - sky_window];
        smoothed[t] = acc / static_cast<double>(std::min<std::int64_t>(t + 1, sky_window));
    }

    BitSnrSeries out;
    out.snr_db.resize(n);
    for (std::int64_t tau = 0; tau < n; ++tau) {
        const std::int64_t src = std::max<std::int64_t>(0, tau - rtt_s);
        out.snr_db[tau] = snr_from_sky_temp(p, smoothed[src], trace.elevation_deg[tau]);
    }
    return out;
}

struct PredictionResult {
    BitSnrSeries preliminary;
    BitSnrSeries corrected;  // X_hat_pred
};

/// Real-time phase: per-second error tracking with an AR(1) error model,
/// refit on a rolling window. Causal: corrected[t + RTT] uses measurements
/// up to time t only.
inline PredictionResult predict_pass(std::span<const double> actual,
                                     const BitSnrSeries& preliminary,
                                     const PredictorConfig& config = {}) {
    const auto n = static_cast<std::int64_t>(actual.size());
    if (preliminary.snr_db.size() != actual.size()) {
        throw std::invalid_argument("predict_pass: series lengths differ");
    }
    PredictionResult result{preliminary, preliminary};
    std::vector<double>& working = result.preliminary.snr_db;  // one-step updated
    std::vector<double>& pred = result.corrected.snr_db;

    std::vector<double> window;
    window.reserve(config.fit_window_s);
    std::optional<Ar1Params> error_model;

    for (std::int64_t t = 0; t < n; ++t) {
        const double basis =
            config.feed_corrected_error ? working[t] : preliminary.snr_db[t];
        const double err = actual[t] - basis;
        if (static_cast<int>(window.size()) == config.fit_window_s) {
            window.erase(window.begin());
        }
        window.push_back(err);

        if (t % config.refit_interval_s == 0 &&
            static_cast<int>(window.size()) >= config.min_fit_samples) {
            try {
                error_model = fit_ar1(window);
            } catch (const std::domain_error&) {
                // Constant window: forecast its level directly.
                double mean = 0.0;
                for (double v : window) mean += v;
                error_model = Ar1Params{mean / window.size(), 0.0, 0.0};
            }
        }

        if (error_model) {
            if (t + 1 < n) {
                working[t + 1] += ar1_forecast(err, *error_model, 1);
            }
            if (t + config.rtt_s < n && config.rtt_s > 0) {
                pred[t + config.rtt_s] =
                    working[t + config.rtt_s] +
                    ar1_forecast(err, *error_model, config.rtt_s);
            }
        }
    }
    result.preliminary.snr_db = preliminary.snr_db;  // hand back the untouched series
    return result;
}

/// Joint (actual range, predicted range) occupancy proportions and the
/// percentage of seconds whose range was predicted correctly.
struct RangeAccuracy {
    BetaMatrix beta;
    double accuracy_pct = 0.0;
};

inline RangeAccuracy range_prediction_matrix(std::span<const double> actual,
                                             std::span<const double> predicted) {
    if (actual.size() != predicted.size() || actual.empty()) {
        throw std::invalid_argument("range_prediction_matrix: bad series");
    }
    RangeAccuracy out;
    for (std::size_t t = 0; t < actual.size(); ++t) {
        out.beta(classify_range(actual[t]), classify_range(predicted[t])) += 1.0;
    }
    double diag = 0.0;
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) out.beta.p[i][j] /= static_cast<double>(actual.size());
        diag += out.beta.p[i][i];
    }
    out.accuracy_pct = 100.0 * diag;
    return out;
}

/// Partial autocorrelation by Durbin-Levinson; index 0 is 1 by convention.
inline std::vector<double> pacf(std::span<const double> series, int max_lag) {
    const auto n = static_cast<std::int64_t>(series.size());
    if (max_lag < 1 || n <= max_lag + 10) {
        throw std::domain_error("pacf: series too short for the requested lag");
    }
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);

    std::vector<double> rho(max_lag + 1, 0.0);
    double c0 = 0.0;
    for (std::int64_t i = 0; i < n; ++i) c0 += (series[i] - mean) * (series[i] - mean);
    c0 /= static_cast<double>(n);
    if (c0 <= 0.0) throw std::domain_error("pacf: series is constant");
    rho[0] = 1.0;
    for (int k = 1; k <= max_lag; ++k) {
        double ck = 0.0;
        for (std::int64_t i = k; i < n; ++i) {
            ck += (series[i] - mean) * (series[i - k] - mean);
        }
        rho[k] = ck / static_cast<double>(n) / c0;
    }

    std::vector<double> out(max_lag + 1, 0.0);
    out[0] = 1.0;
    std::vector<double> phi_prev(max_lag + 1, 0.0), phi(max_lag + 1, 0.0);
    out[1] = phi_prev[1] = rho[1];
    for (int k = 2; k <= max_lag; ++k) {
        double num = rho[k], den = 1.0;
        for (int j = 1; j < k; ++j) {
            num -= phi_prev[j] * rho[k - j];
            den -= phi_prev[j] * rho[j];
        }
        const double phi_kk = std::abs(den) < 1e-14 ? 0.0 : num / den;
        out[k] = phi_kk;
        for (int j = 1; j < k; ++j) {
            phi[j] = phi_prev[j] - phi_kk * phi_prev[k - j];
        }
        phi[k] = phi_kk;
        std::copy(phi.begin(), phi.begin() + k + 1, phi_prev.begin());
    }
    return out;
}

}  // namespace dcsm

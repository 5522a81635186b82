#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace dcsm {

constexpr double kSpeedOfLight = 3.0e8;           // m/s
constexpr double kBoltzmann = 1.380622e-23;       // W/(Hz K)
constexpr double kCosmicBackgroundK = 2.725;      // K
constexpr double kAtmospherePhysicalK = 275.0;    // K, T_p

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Right tail of the standard normal, Q(z) = P(Z > z).
inline double normal_tail(double z) {
    return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

/// Inverse of normal_tail. Rational approximation (Acklam) for the normal
/// quantile, then Newton steps on erfc to push the residual below
/// 1e-12 relative.
inline double q_inv(double tail_prob) {
    if (!(tail_prob > 0.0 && tail_prob < 1.0)) {
        throw std::domain_error("q_inv: tail probability must lie in (0, 1)");
    }
    const double p = 1.0 - tail_prob;  // lower-tail probability

    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};

    constexpr double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // Newton refinement on Q(x) - tail_prob = 0; Q'(x) = -phi(x).
    for (int i = 0; i < 3; ++i) {
        const double err = normal_tail(x) - tail_prob;
        const double pdf =
            std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
        if (pdf <= std::numeric_limits<double>::min()) break;
        x += err / pdf;
    }
    return x;
}

}  // namespace dcsm

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dcsm/math.hpp"

namespace dcsm {

/// Code rate as a fraction; CCSDS turbo rates are 1/2, 1/3, 1/4, 1/6.
struct CodeRate {
    int num = 1;
    int den = 2;

    double value() const { return static_cast<double>(num) / den; }
    friend bool operator==(const CodeRate&, const CodeRate&) = default;
};

struct TurboCode {
    int block_length = 8920;  // information bits K
    CodeRate rate{1, 2};

    friend bool operator==(const TurboCode&, const TurboCode&) = default;
};

inline constexpr std::array<int, 4> kCcsdsBlockLengths = {1784, 3568, 7136, 8920};
inline constexpr std::array<CodeRate, 4> kCcsdsRates = {
    CodeRate{1, 2}, CodeRate{1, 3}, CodeRate{1, 4}, CodeRate{1, 6}};

struct FrameLengths {
    std::int64_t payload_bits = 0;   // RaptorQ symbol L
    std::int64_t channel_bits = 0;   // turbo frame on the wire, (K+36)/r
};

/// Frame arithmetic: ASM 32 + info K + termination 4 on the wire; the info
/// block is ESI(32) + symbol(L) [+ CRC 16].
inline FrameLengths frame_lengths(int block_length, CodeRate rate, bool crc) {
    if (block_length <= 48 || rate.num <= 0 || rate.den <= 0) {
        throw std::domain_error("frame_lengths: invalid code");
    }
    const std::int64_t overhead = crc ? 48 : 32;
    const std::int64_t encoded =
        static_cast<std::int64_t>(block_length + 36) * rate.den;
    if (encoded % rate.num != 0) {
        throw std::domain_error("frame_lengths: non-integral channel frame");
    }
    return {block_length - overhead, encoded / rate.num};
}

// ---------------------------------------------------------------------------
// Bit-SNR ranges (Table I)
// ---------------------------------------------------------------------------

enum class SnrRange : int { A = 0, B = 1, C = 2, D = 3, E = 4 };

inline constexpr double kDropoutThresholdDb = -0.5;
/// Lower edges of ranges B..E and the nominal top of range E.
inline constexpr std::array<double, 5> kRangeEdgesDb = {-0.5, -0.1, 0.15, 0.85, 2.2};

inline SnrRange classify_range(double snr_db) {
    if (snr_db < kRangeEdgesDb[0]) return SnrRange::A;
    if (snr_db < kRangeEdgesDb[1]) return SnrRange::B;
    if (snr_db < kRangeEdgesDb[2]) return SnrRange::C;
    if (snr_db < kRangeEdgesDb[3]) return SnrRange::D;
    return SnrRange::E;  // values above 2.2 dB stay in E
}

/// Table I code for a range; Range A is a transmission halt.
inline std::optional<TurboCode> assigned_code(SnrRange range) {
    switch (range) {
        case SnrRange::A: return std::nullopt;
        case SnrRange::B: return TurboCode{8920, {1, 6}};
        case SnrRange::C: return TurboCode{8920, {1, 4}};
        case SnrRange::D: return TurboCode{8920, {1, 3}};
        case SnrRange::E: return TurboCode{8920, {1, 2}};
    }
    throw std::logic_error("assigned_code: bad range");
}

inline std::optional<TurboCode> select_turbo(double snr_db) {
    if (!std::isfinite(snr_db)) throw std::domain_error("select_turbo: non-finite snr");
    return assigned_code(classify_range(snr_db));
}

/// Code rate per range with r = 0 for the dropout range.
inline double range_rate(SnrRange range) {
    const auto code = assigned_code(range);
    return code ? code->rate.value() : 0.0;
}

// ---------------------------------------------------------------------------
// FER model
// ---------------------------------------------------------------------------

/// Exponential-waterfall FER family P(snr) = clamp(0.5*10^(-s(snr-m)), floor, 1)
/// with one midpoint per (K, r). Midpoints for K = 8920 are solved so the
/// throughput-objective crossovers land exactly on the Table I boundaries;
/// smaller block lengths are shifted right so K = 8920 always dominates.
struct FerCalibration {
    double slope_per_db = 2.2;
    double floor = 1.0e-7;
    double p_target = 0.9999;
    // Midpoints indexed [block][rate] following kCcsdsBlockLengths/kCcsdsRates.
    std::array<std::array<double, 4>, 4> midpoints_db{};
    // Average FER per range B..E used by the fixed-y computation. B..D are
    // grid averages of the curve over their range; E is a calibration knob
    // chosen jointly with p_target so the all-E fixed point returns y = 453.
    std::array<double, 4> range_avg_fer{};

    static FerCalibration defaults(double slope_per_db = 2.2, double floor = 1.0e-7);
};

namespace detail {
inline int block_index(int block_length) {
    for (std::size_t i = 0; i < kCcsdsBlockLengths.size(); ++i) {
        if (kCcsdsBlockLengths[i] == block_length) return static_cast<int>(i);
    }
    throw std::domain_error("fer: block length outside the CCSDS set");
}

inline int rate_index(CodeRate rate) {
    for (std::size_t i = 0; i < kCcsdsRates.size(); ++i) {
        if (kCcsdsRates[i] == rate) return static_cast<int>(i);
    }
    throw std::domain_error("fer: rate outside the CCSDS set");
}
}  // namespace detail

inline double fer(double snr_db, int block_length, CodeRate rate,
                  const FerCalibration& calib) {
    const double m =
        calib.midpoints_db[detail::block_index(block_length)][detail::rate_index(rate)];
    const double raw = 0.5 * std::pow(10.0, -calib.slope_per_db * (snr_db - m));
    if (raw >= 1.0) return 1.0;
    return raw < calib.floor ? calib.floor : raw;
}

/// Throughput objective (1 - P_E) * r * (K-32)/(K+36), maximized by the
/// dynamic code selection.
inline double throughput_objective(double snr_db, int block_length, CodeRate rate,
                                   const FerCalibration& calib) {
    const double efficiency = static_cast<double>(block_length - 32) /
                              static_cast<double>(block_length + 36);
    return (1.0 - fer(snr_db, block_length, rate, calib)) * rate.value() * efficiency;
}

inline FerCalibration FerCalibration::defaults(double slope_per_db, double floor) {
    FerCalibration c;
    c.slope_per_db = slope_per_db;
    c.floor = floor;
    const double s = c.slope_per_db;

    // K = 8920 midpoints. The most robust rate's curve reaches FER = 1
    // exactly at the dropout threshold, so no code has positive throughput
    // below -0.5 dB and the Range A halt is the objective's own zero; each
    // faster rate's midpoint then follows from the crossover condition
    // (1-P_hi) r_hi = (1-P_lo) r_lo at the boundary.
    std::array<double, 4> m{};  // indexed by kCcsdsRates: 1/2, 1/3, 1/4, 1/6
    m[3] = kDropoutThresholdDb + std::log10(2.0) / s;
    const struct {
        int hi, lo;
        double boundary;
    } chain[] = {{2, 3, kRangeEdgesDb[1]},   // 1/4 from 1/6 at -0.1 dB
                 {1, 2, kRangeEdgesDb[2]},   // 1/3 from 1/4 at 0.15 dB
                 {0, 1, kRangeEdgesDb[3]}};  // 1/2 from 1/3 at 0.85 dB
    for (const auto& link : chain) {
        const double p_lo =
            0.5 * std::pow(10.0, -s * (link.boundary - m[link.lo]));
        const double ratio =
            kCcsdsRates[link.lo].value() / kCcsdsRates[link.hi].value();
        const double p_hi = 1.0 - ratio * (1.0 - p_lo);
        m[link.hi] = link.boundary + std::log10(2.0 * p_hi) / s;
    }

    const std::array<double, 4> block_offset = {0.45, 0.30, 0.15, 0.0};
    for (std::size_t b = 0; b < kCcsdsBlockLengths.size(); ++b) {
        for (std::size_t r = 0; r < kCcsdsRates.size(); ++r) {
            c.midpoints_db[b][r] = m[r] + block_offset[b];
        }
    }

    // Grid averages over B..D (0.001 dB steps, endpoints included).
    for (int range = 1; range <= 3; ++range) {
        const auto code = *assigned_code(static_cast<SnrRange>(range));
        const double lo = kRangeEdgesDb[range - 1];
        const double hi = kRangeEdgesDb[range];
        const int steps = static_cast<int>(std::lround((hi - lo) / 0.001));
        double sum = 0.0;
        for (int k = 0; k <= steps; ++k) {
            sum += fer(lo + 0.001 * k, code.block_length, code.rate, c);
        }
        c.range_avg_fer[range - 1] = sum / (steps + 1);
    }
    c.range_avg_fer[3] = 0.008365;
    return c;
}

/// FER of a range's own code at the range's upper edge (best case within
/// the range) and lower edge (worst case).
inline double range_fer_min(SnrRange range, const FerCalibration& calib) {
    const auto code = assigned_code(range);
    if (!code) throw std::domain_error("range_fer_min: dropout range has no code");
    return fer(kRangeEdgesDb[static_cast<int>(range)], code->block_length, code->rate,
               calib);
}

inline double range_fer_max(SnrRange range, const FerCalibration& calib) {
    const auto code = assigned_code(range);
    if (!code) throw std::domain_error("range_fer_max: dropout range has no code");
    return fer(kRangeEdgesDb[static_cast<int>(range) - 1], code->block_length,
               code->rate, calib);
}

// ---------------------------------------------------------------------------
// Data rates and sizing
// ---------------------------------------------------------------------------

enum class RateVariant { kWithFountain, kPlain };

/// Net data rate for a code: (K-32)/(K+36) R_b r with fountain framing,
/// K/(K+36) R_b r without (genie II / static II).
inline double data_rate(int block_length, CodeRate rate, double channel_rate_bps,
                        RateVariant variant) {
    if (block_length <= 32 || channel_rate_bps <= 0.0) {
        throw std::domain_error("data_rate: invalid inputs");
    }
    const double numer = variant == RateVariant::kWithFountain
                             ? static_cast<double>(block_length - 32)
                             : static_cast<double>(block_length);
    return numer / (block_length + 36) * channel_rate_bps * rate.value();
}

/// Fountain source symbols for a file: K_S = ceil(file_bits / L).
inline std::int64_t source_symbol_count(std::int64_t file_bits,
                                        std::int64_t payload_bits) {
    if (file_bits <= 0 || payload_bits <= 0) {
        throw std::domain_error("source_symbol_count: invalid sizes");
    }
    return (file_bits + payload_bits - 1) / payload_bits;
}

/// ADUs per file for the fountainless methods: ceil(file_bits / K).
inline std::int64_t adu_count(std::int64_t file_bits, int block_length) {
    if (file_bits <= 0 || block_length <= 0) {
        throw std::domain_error("adu_count: invalid sizes");
    }
    return (file_bits + block_length - 1) / block_length;
}

// ---------------------------------------------------------------------------
// Fountain decode model and overhead sizing
// ---------------------------------------------------------------------------

/// Decode probability with x = received - K_S extra clean symbols:
/// 0 below K_S, else 1 - 10^(-2(x+1)).
inline double fountain_decode_success(std::int64_t received_clean,
                                      std::int64_t source_symbols) {
    if (received_clean < 0 || source_symbols < 1) {
        throw std::domain_error("fountain_decode_success: invalid counts");
    }
    if (received_clean < source_symbols) return 0.0;
    const double excess = static_cast<double>(received_clean - source_symbols);
    return 1.0 - std::pow(10.0, -2.0 * (excess + 1.0));
}

/// Smallest integer y with y >= sqrt(Var) Q^-1(1 - p_target) + mean.
inline std::int64_t y_required(double mean, double variance, double p_target) {
    if (mean < 0.0 || variance < 0.0) {
        throw std::domain_error("y_required: negative mean or variance");
    }
    if (!(p_target > 0.0 && p_target < 1.0)) {
        throw std::domain_error("y_required: p_target must lie in (0, 1)");
    }
    if (mean == 0.0 && variance == 0.0) return 0;
    const double bound = std::sqrt(variance) * q_inv(1.0 - p_target) + mean;
    const double lifted = std::ceil(bound);
    return lifted < 0.0 ? 0 : static_cast<std::int64_t>(lifted);
}

/// Joint occurrence proportions of (actual range i, predicted range j).
struct BetaMatrix {
    std::array<std::array<double, 5>, 5> p{};  // sums to 1 over all cells

    double& operator()(SnrRange i, SnrRange j) {
        return p[static_cast<int>(i)][static_cast<int>(j)];
    }
    double operator()(SnrRange i, SnrRange j) const {
        return p[static_cast<int>(i)][static_cast<int>(j)];
    }

    std::array<double, 5> row_sums() const {
        std::array<double, 5> a{};
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) a[i] += p[i][j];
        return a;
    }
    std::array<double, 5> col_sums() const {
        std::array<double, 5> b{};
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) b[j] += p[i][j];
        return b;
    }

    /// Perfect-prediction matrix with the given actual occupancy.
    static BetaMatrix diagonal(const std::array<double, 5>& alpha) {
        BetaMatrix b;
        for (int i = 0; i < 5; ++i) b.p[i][i] = alpha[i];
        return b;
    }

    /// The degenerate always-predict-E matrix of the static method.
    static BetaMatrix all_range_e() {
        BetaMatrix b;
        b.p[4][4] = 1.0;
        return b;
    }
};

struct MeanVariance {
    double mean = 0.0;
    double variance = 0.0;
};

/// Failure mean/variance for one file under the fixed-y approach.
/// `range_avg_fer` holds the per-range average FERs for B..E.
inline MeanVariance y_mean_var_fixed(const BetaMatrix& beta,
                                     const std::array<double, 4>& range_avg_fer,
                                     std::int64_t source_symbols, std::int64_t theta,
                                     std::int64_t y) {
    const auto alpha = beta.row_sums();
    const auto pred = beta.col_sums();

    // Symbol share per transmit rate, pi_i = r_i beta_i / sum_j r_j beta_j.
    std::array<double, 5> pi{};
    double denom = 0.0;
    for (int j = 0; j < 5; ++j) denom += range_rate(static_cast<SnrRange>(j)) * pred[j];
    if (denom <= 0.0) return {};
    for (int j = 0; j < 5; ++j) {
        pi[j] = range_rate(static_cast<SnrRange>(j)) * pred[j] / denom;
    }

    // Experienced FER per row, p_hat_i = sum_j P(pred j | actual i) p_avg_j.
    std::array<double, 5> p_hat{};
    for (int i = 0; i < 5; ++i) {
        if (alpha[i] <= 0.0) continue;
        for (int j = 1; j < 5; ++j) {
            p_hat[i] += beta.p[i][j] / alpha[i] * range_avg_fer[j - 1];
        }
    }

    const double n = static_cast<double>(source_symbols + theta + y);
    MeanVariance mv;
    for (int i = 0; i < 5; ++i) {
        mv.mean += pi[i] * n * p_hat[i];
        mv.variance += pi[i] * n * p_hat[i] * (1.0 - p_hat[i]);
    }
    return mv;
}

enum class AdaptiveMode { kBest, kAverage, kWorst };

/// Failure mean/variance for one file under the adaptive approach, from the
/// per-rate symbol proportions pi recorded on board.
inline MeanVariance y_mean_var_adaptive(const std::array<double, 5>& pi,
                                        AdaptiveMode mode,
                                        std::int64_t source_symbols,
                                        std::int64_t theta, std::int64_t y,
                                        const FerCalibration& calib) {
    const double n = static_cast<double>(source_symbols + theta + y);
    MeanVariance mv;
    for (int i = 1; i < 5; ++i) {
        if (pi[i] <= 0.0) continue;
        const auto range = static_cast<SnrRange>(i);
        const double p_min = range_fer_min(range, calib);
        const double p_max = range_fer_max(range, calib);
        double p = 0.0;
        switch (mode) {
            case AdaptiveMode::kBest: p = p_min; break;
            case AdaptiveMode::kWorst: p = p_max; break;
            case AdaptiveMode::kAverage: p = 0.5 * (p_min + p_max); break;
        }
        mv.mean += pi[i] * n * p;
        mv.variance += pi[i] * n * p * (1.0 - p);
    }
    return mv;
}

/// Fixed-point solution of y = y_required(mean(y), var(y)) from y = 0.
inline std::int64_t solve_fixed_y(const BetaMatrix& beta,
                                  const std::array<double, 4>& range_avg_fer,
                                  std::int64_t source_symbols, std::int64_t theta,
                                  double p_target) {
    std::int64_t y = 0;
    for (int iter = 0; iter < 100; ++iter) {
        const auto mv = y_mean_var_fixed(beta, range_avg_fer, source_symbols, theta, y);
        const std::int64_t next = y_required(mv.mean, mv.variance, p_target);
        if (next == y) return y;
        y = next;
    }
    return y;
}

/// Fixed-point solution for the adaptive approach.
inline std::int64_t solve_adaptive_y(const std::array<double, 5>& pi,
                                     AdaptiveMode mode, std::int64_t source_symbols,
                                     std::int64_t theta, double p_target,
                                     const FerCalibration& calib) {
    std::int64_t y = 0;
    for (int iter = 0; iter < 100; ++iter) {
        const auto mv =
            y_mean_var_adaptive(pi, mode, source_symbols, theta, y, calib);
        const std::int64_t next = y_required(mv.mean, mv.variance, p_target);
        if (next == y) return y;
        y = next;
    }
    return y;
}

/// y for a pass whose bit-SNR sits entirely in Range E with perfect
/// prediction; the fixed_ymin policy transmits this constant.
inline std::int64_t y_min_all_range_e(const FerCalibration& calib,
                                      std::int64_t source_symbols,
                                      std::int64_t theta) {
    return solve_fixed_y(BetaMatrix::all_range_e(), calib.range_avg_fer,
                         source_symbols, theta, calib.p_target);
}

}  // namespace dcsm

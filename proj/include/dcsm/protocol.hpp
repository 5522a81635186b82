#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcsm/coding.hpp"
#include "dcsm/rng.hpp"

namespace dcsm {

enum class Method { kDcsm, kGenie1, kGenie2, kStatic1, kStatic2 };

enum class YPolicy {
    kFixedY,
    kFixed2Y,
    kFixedYmin,
    kAdaptiveBest,
    kAdaptiveAverage,
    kAdaptiveWorst,
    kNone,  // fountainless methods
};

struct MethodSpec {
    Method method = Method::kDcsm;
    YPolicy y_policy = YPolicy::kFixedYmin;

    bool uses_fountain() const {
        return method == Method::kDcsm || method == Method::kGenie1 ||
               method == Method::kStatic1;
    }

    void validate() const {
        if (uses_fountain() == (y_policy == YPolicy::kNone)) {
            throw std::invalid_argument(
                "method spec: y policy is required exactly for the fountain methods");
        }
    }

    std::string name() const {
        std::string base;
        switch (method) {
            case Method::kDcsm: base = "dcsm"; break;
            case Method::kGenie1: base = "genie1"; break;
            case Method::kGenie2: base = "genie2"; break;
            case Method::kStatic1: base = "static1"; break;
            case Method::kStatic2: base = "static2"; break;
        }
        return base;
    }

    std::string policy_name() const {
        switch (y_policy) {
            case YPolicy::kFixedY: return "fixed_y";
            case YPolicy::kFixed2Y: return "fixed_2y";
            case YPolicy::kFixedYmin: return "fixed_ymin";
            case YPolicy::kAdaptiveBest: return "adaptive_best";
            case YPolicy::kAdaptiveAverage: return "adaptive_average";
            case YPolicy::kAdaptiveWorst: return "adaptive_worst";
            case YPolicy::kNone: return "n/a";
        }
        return "n/a";
    }

    /// Parse "dcsm:fixed_ymin", "genie2", "static1:adaptive_best", ...
    static MethodSpec parse(std::string_view text) {
        MethodSpec spec;
        const auto colon = text.find(':');
        const std::string_view base = text.substr(0, colon);
        if (base == "dcsm") spec.method = Method::kDcsm;
        else if (base == "genie1") spec.method = Method::kGenie1;
        else if (base == "genie2") spec.method = Method::kGenie2;
        else if (base == "static1") spec.method = Method::kStatic1;
        else if (base == "static2") spec.method = Method::kStatic2;
        else throw std::invalid_argument("unknown method '" + std::string(base) + "'");

        if (colon == std::string_view::npos) {
            spec.y_policy = spec.uses_fountain() ? YPolicy::kFixedYmin : YPolicy::kNone;
        } else {
            const std::string_view policy = text.substr(colon + 1);
            if (policy == "fixed_y") spec.y_policy = YPolicy::kFixedY;
            else if (policy == "fixed_2y") spec.y_policy = YPolicy::kFixed2Y;
            else if (policy == "fixed_ymin") spec.y_policy = YPolicy::kFixedYmin;
            else if (policy == "adaptive_best") spec.y_policy = YPolicy::kAdaptiveBest;
            else if (policy == "adaptive_average") spec.y_policy = YPolicy::kAdaptiveAverage;
            else if (policy == "adaptive_worst") spec.y_policy = YPolicy::kAdaptiveWorst;
            else throw std::invalid_argument("unknown y policy '" + std::string(policy) + "'");
        }
        spec.validate();
        return spec;
    }
};

struct ControlMessage {
    enum class Kind { kRateSelect, kHalt, kCts, kFeedback };
    Kind kind = Kind::kRateSelect;
    int rate_den = 0;            // rate_select / cts payload (two-bit code id)
    std::int64_t file_id = -1;   // feedback
    std::int64_t extra_count = 0;
    double send_time_s = 0.0;
    double arrival_time_s = 0.0;  // send_time + RTT/2
};

/// Per-second commanded code over a pass, arrival-time indexed:
/// 0 = halt (Range A), otherwise the rate denominator from Table I.
struct CommandSchedule {
    std::vector<std::uint8_t> rate_den;
    std::vector<ControlMessage> messages;
};

inline int range_rate_den(SnrRange range) {
    const auto code = assigned_code(range);
    return code ? code->rate.den : 0;
}

inline SnrRange range_from_den(int den) {
    switch (den) {
        case 6: return SnrRange::B;
        case 4: return SnrRange::C;
        case 3: return SnrRange::D;
        case 2: return SnrRange::E;
        default: throw std::logic_error("range_from_den: bad denominator");
    }
}

/// Build the command stream for a method. DCSM commands are generated from
/// the predicted series RTT early, arrive at the spacecraft RTT/2 later and
/// take effect on the downlink exactly at the predicted second. Genie uses
/// the actual series through the same path, which realizes its zero-latency
/// exact switching. Static issues one initial (8920, 1/2) command.
inline CommandSchedule rate_command_source(Method method,
                                           std::span<const double> basis_snr,
                                           std::int64_t rtt_s) {
    if (basis_snr.empty()) throw std::invalid_argument("rate_command_source: empty series");
    CommandSchedule out;
    out.rate_den.resize(basis_snr.size());

    if (method == Method::kStatic1 || method == Method::kStatic2) {
        std::fill(out.rate_den.begin(), out.rate_den.end(), 2);
        out.messages.push_back({ControlMessage::Kind::kRateSelect, 2, -1, 0,
                                -static_cast<double>(rtt_s),
                                -static_cast<double>(rtt_s) / 2.0});
        return out;
    }

    int prev_den = -1;
    for (std::size_t sec = 0; sec < basis_snr.size(); ++sec) {
        const int den = range_rate_den(classify_range(basis_snr[sec]));
        out.rate_den[sec] = static_cast<std::uint8_t>(den);
        if (den == prev_den) continue;
        ControlMessage msg;
        msg.rate_den = den;
        msg.send_time_s = static_cast<double>(sec) - static_cast<double>(rtt_s);
        msg.arrival_time_s = msg.send_time_s + static_cast<double>(rtt_s) / 2.0;
        if (den == 0) {
            msg.kind = ControlMessage::Kind::kHalt;
        } else if (prev_den == 0) {
            msg.kind = ControlMessage::Kind::kCts;
        } else {
            msg.kind = ControlMessage::Kind::kRateSelect;
        }
        out.messages.push_back(msg);
        prev_den = den;
    }
    return out;
}

/// Copies needed to push a packet's failure probability to epsilon or below.
inline int genie2_copies(double fer_value, double epsilon = 1.0e-3) {
    if (!(fer_value >= 0.0 && fer_value < 1.0)) {
        throw std::domain_error("genie2_copies: fer must lie in [0, 1)");
    }
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw std::domain_error("genie2_copies: epsilon must lie in (0, 1)");
    }
    if (fer_value <= epsilon) return 1;
    // Exact-power ties (e.g. 0.1^3 vs 1e-3) resolve to the smaller count.
    const double exact = std::log(epsilon) / std::log(fer_value);
    int copies = std::max(1, static_cast<int>(std::ceil(exact - 1e-9)));
    while (std::pow(fer_value, copies) > epsilon * (1.0 + 1e-9)) ++copies;
    return copies;
}

struct ProtocolConfig {
    std::int64_t rtt_s = 1200;
    double channel_rate_bps = 3.0e6;
    int block_length = 8920;
    bool crc = false;
    std::int64_t file_bits = 400000000;  // 50 MB
    std::int64_t theta = 5;
    double genie2_epsilon = 1.0e-3;
    FerCalibration calib = FerCalibration::defaults();

    std::int64_t payload_bits() const {
        return block_length - (crc ? 48 : 32);
    }
    std::int64_t source_symbols() const {
        return source_symbol_count(file_bits, payload_bits());
    }
    std::int64_t static2_adus() const { return adu_count(file_bits, block_length); }

    std::int64_t frame_duration_us(int rate_den) const {
        const auto channel_bits =
            static_cast<double>((block_length + 36) * rate_den);
        return std::llround(channel_bits * 1.0e6 / channel_rate_bps);
    }
    std::int64_t channel_bits(int rate_den) const {
        return static_cast<std::int64_t>(block_length + 36) * rate_den;
    }
};

/// Previous-pass statistics feeding the fixed-y computation.
struct YContext {
    BetaMatrix previous_beta;            // DCSM: joint actual/predicted occupancy
    std::array<double, 5> previous_alpha{};  // genie: actual occupancy
};

/// Pass-constant y for the fixed policies. The static method's computation
/// collapses to the all-Range-E case, which equals y_min by construction.
inline std::int64_t compute_fixed_y(const MethodSpec& spec, const ProtocolConfig& config,
                                    const YContext& context) {
    const std::int64_t ks = config.source_symbols();
    switch (spec.y_policy) {
        case YPolicy::kFixedYmin:
            return y_min_all_range_e(config.calib, ks, config.theta);
        case YPolicy::kFixedY:
        case YPolicy::kFixed2Y: {
            BetaMatrix beta;
            switch (spec.method) {
                case Method::kDcsm: beta = context.previous_beta; break;
                case Method::kGenie1:
                    beta = BetaMatrix::diagonal(context.previous_alpha);
                    break;
                default: beta = BetaMatrix::all_range_e(); break;
            }
            const std::int64_t y = solve_fixed_y(beta, config.calib.range_avg_fer, ks,
                                                 config.theta, config.calib.p_target);
            return spec.y_policy == YPolicy::kFixed2Y ? 2 * y : y;
        }
        default:
            throw std::logic_error("compute_fixed_y: not a fixed policy");
    }
}

/// Per-file fountain bookkeeping.
struct FileRecord {
    std::int64_t file_id = 0;
    std::int64_t y_m = -1;  // -1 while an adaptive y is still unset
    std::int64_t scheduled = 0;
    std::int64_t symbols_sent = 0;
    std::int64_t clean_received = 0;
    std::int64_t lost = 0;
    enum class Status { kPending, kDecoded, kFailedRetry };
    Status status = Status::kPending;
    double first_tx_s = -1.0;
    double delivery_s = -1.0;
    std::array<std::int64_t, 5> sent_per_range{};  // by commanded range
};

/// Raw protocol-level accounting for one pass x method run.
struct PassOutcome {
    std::uint64_t b_tx_bits = 0;
    std::uint64_t d_tx_bits = 0;
    std::uint64_t b_rcvd_bits = 0;
    std::uint64_t d_rcvd_bits = 0;
    std::int64_t frames_tx = 0;
    std::int64_t frames_clean = 0;
    std::int64_t files_tx = 0;
    std::int64_t files_success = 0;
    std::int64_t symbols_correct_rate = 0;  // k_s
    std::int64_t feedback_count = 0;
    std::int64_t rate_command_count = 0;
    std::int64_t y_fixed = -1;
    std::vector<FileRecord> files;
};

namespace detail {

struct LossModel {
    // FER per second for each Table I denominator {2, 3, 4, 6}.
    std::array<std::vector<double>, 4> fer_by_sec;

    static int den_slot(int den) {
        switch (den) {
            case 2: return 0;
            case 3: return 1;
            case 4: return 2;
            case 6: return 3;
        }
        throw std::logic_error("LossModel: bad denominator");
    }

    LossModel(std::span<const double> actual_snr, const ProtocolConfig& config) {
        const int dens[4] = {2, 3, 4, 6};
        for (int s = 0; s < 4; ++s) {
            fer_by_sec[s].resize(actual_snr.size());
            for (std::size_t sec = 0; sec < actual_snr.size(); ++sec) {
                fer_by_sec[s][sec] = fer(actual_snr[sec], config.block_length,
                                         {1, dens[s]}, config.calib);
            }
        }
    }

    double at(std::size_t sec, int den) const { return fer_by_sec[den_slot(den)][sec]; }
};

}  // namespace detail

/// Frame-level simulation of one pass for a fountain method (DCSM, genie I,
/// static I). Times are arrival-side microseconds on [0, (T_e+1) s); a frame
/// in flight finishes under the code it started with.
struct FrameLogEntry {
    std::int64_t start_us = 0;
    std::int64_t file_id = 0;
    bool lost = false;
};

inline PassOutcome run_fountain_pass(const MethodSpec& spec,
                                     const ProtocolConfig& config,
                                     std::span<const double> actual_snr,
                                     const CommandSchedule& schedule,
                                     std::int64_t y_fixed, std::uint64_t pass_seed,
                                     std::vector<FrameLogEntry>* frame_log = nullptr) {
    spec.validate();
    if (!spec.uses_fountain()) {
        throw std::invalid_argument("run_fountain_pass: fountainless method");
    }
    if (schedule.rate_den.size() != actual_snr.size()) {
        throw std::invalid_argument("run_fountain_pass: schedule/snr length mismatch");
    }
    const auto n_sec = static_cast<std::int64_t>(actual_snr.size());
    const std::int64_t end_us = n_sec * 1'000'000;
    const std::int64_t rtt_us = config.rtt_s * 1'000'000;
    const std::int64_t ks = config.source_symbols();
    const std::int64_t payload = config.payload_bits();
    const bool adaptive = spec.y_policy == YPolicy::kAdaptiveBest ||
                          spec.y_policy == YPolicy::kAdaptiveAverage ||
                          spec.y_policy == YPolicy::kAdaptiveWorst;

    const detail::LossModel loss(actual_snr, config);

    PassOutcome out;
    out.rate_command_count = static_cast<std::int64_t>(schedule.messages.size());
    out.y_fixed = adaptive ? -1 : y_fixed;

    std::vector<FileRecord> files;
    auto file_at = [&](std::int64_t id) -> FileRecord& {
        while (static_cast<std::int64_t>(files.size()) <= id) {
            FileRecord rec;
            rec.file_id = static_cast<std::int64_t>(files.size());
            rec.y_m = adaptive ? -1 : y_fixed;
            rec.scheduled = ks + config.theta + (adaptive ? 0 : y_fixed);
            files.push_back(rec);
        }
        return files[id];
    };

    // Feedback already sent but not yet effective at the spacecraft, and the
    // retransmission bursts currently preempting the serial order.
    std::deque<std::pair<std::int64_t, std::int64_t>> feedback_in_flight;  // (us, file)
    std::deque<std::pair<std::int64_t, std::int64_t>> retrans;             // (file, count)

    std::uint64_t frame_counter = 0;
    std::uint64_t decode_counter = 0;
    const std::uint64_t decode_seed = splitmix64(pass_seed ^ 0x0F0C7A1E5EEDULL);

    auto request_extra = [&](std::int64_t file_id, std::int64_t when_us) {
        feedback_in_flight.emplace_back(when_us + rtt_us, file_id);
        ++out.feedback_count;
    };

    std::int64_t current_file = 0;
    std::int64_t t_us = 0;
    while (true) {
        // Skip halt seconds (frames are deferred, never dropped).
        std::int64_t sec = t_us / 1'000'000;
        while (sec < n_sec && schedule.rate_den[sec] == 0) {
            ++sec;
            t_us = sec * 1'000'000;
        }
        if (sec >= n_sec) break;
        const int den = schedule.rate_den[sec];
        const std::int64_t dur = config.frame_duration_us(den);
        if (t_us + dur > end_us) break;

        while (!feedback_in_flight.empty() && feedback_in_flight.front().first <= t_us) {
            const std::int64_t id = feedback_in_flight.front().second;
            feedback_in_flight.pop_front();
            if (!retrans.empty() && retrans.back().first == id) {
                ++retrans.back().second;
            } else {
                retrans.emplace_back(id, 1);
            }
        }

        // Serial order with retransmission bursts preempting the current file.
        std::int64_t file_id;
        bool from_retrans = false;
        if (!retrans.empty()) {
            file_id = retrans.front().first;
            from_retrans = true;
        } else {
            if (file_at(current_file).symbols_sent >= file_at(current_file).scheduled) {
                ++current_file;
            }
            file_id = current_file;
        }
        FileRecord& rec = file_at(file_id);

        const std::int64_t t_end = t_us + dur;
        const SnrRange commanded = range_from_den(den);
        const bool lost =
            counter_uniform(pass_seed, frame_counter++) < loss.at(sec, den);

        if (frame_log) frame_log->push_back({t_us, file_id, lost});
        if (rec.first_tx_s < 0.0) rec.first_tx_s = static_cast<double>(t_us) * 1e-6;
        ++rec.symbols_sent;
        if (from_retrans && --retrans.front().second == 0) retrans.pop_front();
        if (rec.symbols_sent <= ks + config.theta) {
            ++rec.sent_per_range[static_cast<int>(commanded)];
        }
        out.b_tx_bits += static_cast<std::uint64_t>(config.channel_bits(den));
        out.d_tx_bits += static_cast<std::uint64_t>(payload);
        ++out.frames_tx;
        if (classify_range(actual_snr[sec]) == commanded) ++out.symbols_correct_rate;

        // The spacecraft fixes the adaptive y_m when it finishes the
        // (K_S + Theta)-th symbol of the file.
        if (adaptive && rec.y_m < 0 && rec.symbols_sent == ks + config.theta) {
            std::array<double, 5> pi{};
            for (int r = 0; r < 5; ++r) {
                pi[r] = static_cast<double>(rec.sent_per_range[r]) /
                        static_cast<double>(ks + config.theta);
            }
            const AdaptiveMode mode = spec.y_policy == YPolicy::kAdaptiveBest
                                          ? AdaptiveMode::kBest
                                          : spec.y_policy == YPolicy::kAdaptiveWorst
                                                ? AdaptiveMode::kWorst
                                                : AdaptiveMode::kAverage;
            rec.y_m = solve_adaptive_y(pi, mode, ks, config.theta,
                                       config.calib.p_target, config.calib);
            rec.scheduled += rec.y_m;
            if (rec.status == FileRecord::Status::kPending && rec.lost > rec.y_m) {
                for (std::int64_t i = rec.lost - rec.y_m; i > 0; --i) {
                    request_extra(rec.file_id, t_end);
                }
            }
        }

        // Receiver side at frame arrival.
        if (lost) {
            if (rec.status == FileRecord::Status::kPending ||
                rec.status == FileRecord::Status::kFailedRetry) {
                ++rec.lost;
                if (rec.y_m >= 0 && rec.lost > rec.y_m) {
                    request_extra(rec.file_id, t_end);
                }
            }
        } else {
            out.b_rcvd_bits += static_cast<std::uint64_t>(config.channel_bits(den));
            out.d_rcvd_bits += static_cast<std::uint64_t>(payload);
            ++out.frames_clean;
            if (rec.status != FileRecord::Status::kDecoded) {
                ++rec.clean_received;
                if (rec.clean_received >= ks + config.theta) {
                    const double p = fountain_decode_success(rec.clean_received, ks);
                    const double u = counter_uniform(decode_seed, decode_counter++);
                    if (u < p) {
                        rec.status = FileRecord::Status::kDecoded;
                        rec.delivery_s = static_cast<double>(t_end) * 1e-6;
                    } else {
                        rec.status = FileRecord::Status::kFailedRetry;
                        request_extra(rec.file_id, t_end);
                    }
                }
            }
        }
        t_us = t_end;
    }

    for (const auto& rec : files) {
        if (rec.symbols_sent > 0) ++out.files_tx;
        if (rec.status == FileRecord::Status::kDecoded) ++out.files_success;
        if (rec.clean_received + rec.lost > rec.symbols_sent) {
            throw std::logic_error("fountain pass: file bookkeeping out of balance");
        }
    }
    std::int64_t total_symbols = 0;
    for (const auto& rec : files) total_symbols += rec.symbols_sent;
    if (total_symbols != out.frames_tx) {
        throw std::logic_error("fountain pass: symbol conservation violated");
    }
    out.files = std::move(files);
    return out;
}

/// Frame-level simulation for the fountainless methods (genie II, static II):
/// fixed-size ADUs, blind replication for genie II, no feedback path.
inline PassOutcome run_adu_pass(const MethodSpec& spec, const ProtocolConfig& config,
                                std::span<const double> actual_snr,
                                const CommandSchedule& schedule,
                                std::uint64_t pass_seed) {
    spec.validate();
    if (spec.uses_fountain()) {
        throw std::invalid_argument("run_adu_pass: fountain method");
    }
    if (schedule.rate_den.size() != actual_snr.size()) {
        throw std::invalid_argument("run_adu_pass: schedule/snr length mismatch");
    }
    const auto n_sec = static_cast<std::int64_t>(actual_snr.size());
    const std::int64_t end_us = n_sec * 1'000'000;
    const std::int64_t adus = config.static2_adus();
    const detail::LossModel loss(actual_snr, config);

    PassOutcome out;
    out.rate_command_count = static_cast<std::int64_t>(schedule.messages.size());

    std::vector<FileRecord> files;
    std::uint64_t frame_counter = 0;

    std::int64_t t_us = 0;
    bool done = false;
    while (!done) {
        FileRecord rec;
        rec.file_id = static_cast<std::int64_t>(files.size());
        rec.scheduled = adus;
        std::int64_t adus_clean = 0;
        std::int64_t adus_attempted = 0;

        for (std::int64_t adu = 0; adu < adus && !done; ++adu) {
            int copies = 1;
            bool copies_fixed = false;
            bool adu_clean = false;
            bool adu_started = false;
            for (int copy = 0; copy < copies; ++copy) {
                std::int64_t sec = t_us / 1'000'000;
                while (sec < n_sec && schedule.rate_den[sec] == 0) {
                    ++sec;
                    t_us = sec * 1'000'000;
                }
                if (sec >= n_sec) {
                    done = true;
                    break;
                }
                const int den = schedule.rate_den[sec];
                const std::int64_t dur = config.frame_duration_us(den);
                if (t_us + dur > end_us) {
                    done = true;
                    break;
                }
                if (!copies_fixed && spec.method == Method::kGenie2) {
                    copies = genie2_copies(loss.at(sec, den), config.genie2_epsilon);
                    copies_fixed = true;
                }
                if (rec.first_tx_s < 0.0) rec.first_tx_s = static_cast<double>(t_us) * 1e-6;
                adu_started = true;

                const bool lost =
                    counter_uniform(pass_seed, frame_counter++) < loss.at(sec, den);
                ++rec.symbols_sent;
                ++rec.sent_per_range[static_cast<int>(range_from_den(den))];
                out.b_tx_bits += static_cast<std::uint64_t>(config.channel_bits(den));
                out.d_tx_bits += static_cast<std::uint64_t>(config.block_length);
                ++out.frames_tx;
                if (classify_range(actual_snr[sec]) == range_from_den(den)) {
                    ++out.symbols_correct_rate;
                }
                if (!lost) {
                    adu_clean = true;
                    ++rec.clean_received;
                    ++out.frames_clean;
                    out.b_rcvd_bits += static_cast<std::uint64_t>(config.channel_bits(den));
                    out.d_rcvd_bits += static_cast<std::uint64_t>(config.block_length);
                } else {
                    ++rec.lost;
                }
                t_us += dur;
            }
            if (adu_started) ++adus_attempted;
            if (adu_clean) ++adus_clean;
        }

        if (rec.symbols_sent > 0) {
            if (adus_attempted == adus && adus_clean == adus) {
                rec.status = FileRecord::Status::kDecoded;
                rec.delivery_s = static_cast<double>(t_us) * 1e-6;
                ++out.files_success;
            }
            ++out.files_tx;
            files.push_back(rec);
        }
    }
    out.files = std::move(files);
    return out;
}

}  // namespace dcsm

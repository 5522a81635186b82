#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dcsm/link_budget.hpp"
#include "dcsm/predictor.hpp"
#include "dcsm/protocol.hpp"
#include "dcsm/trace.hpp"

namespace dcsm {

struct TraceSource {
    enum class Kind { kSynthetic, kCsv };
    Kind kind = Kind::kSynthetic;
    SynthProfile profile;
    std::vector<std::string> csv_texts;  // parsed already-loaded CSV bodies
};

struct RunConfig {
    LinkBudgetParams link;  // the true channel
    // The predictor's assumed calibration; defaults to the true parameters.
    std::optional<LinkBudgetParams> predictor_link;
    PredictorConfig prediction;
    std::int64_t rtt_s = 1200;
    std::int64_t file_size_bytes = 50'000'000;
    std::int64_t theta = 5;
    double genie2_epsilon = 1.0e-3;
    FerCalibration calib = FerCalibration::defaults();
    TraceSource trace_source;
    std::vector<MethodSpec> methods = {
        MethodSpec::parse("dcsm:fixed_ymin"), MethodSpec::parse("genie1:fixed_ymin"),
        MethodSpec::parse("static1:fixed_ymin"), MethodSpec::parse("genie2"),
        MethodSpec::parse("static2")};
    int passes = 1;
    std::uint64_t master_seed = 1;
    int jobs = 1;

    ProtocolConfig protocol_config() const {
        ProtocolConfig p;
        p.rtt_s = rtt_s;
        p.channel_rate_bps = link.channel_rate_bps;
        p.block_length = 8920;
        p.crc = link.crc_enabled;
        p.file_bits = file_size_bytes * 8;
        p.theta = theta;
        p.genie2_epsilon = genie2_epsilon;
        p.calib = calib;
        return p;
    }

    PredictorConfig predictor_config() const {
        PredictorConfig p = prediction;
        p.rtt_s = rtt_s;
        return p;
    }

    const LinkBudgetParams& assumed_link() const {
        return predictor_link ? *predictor_link : link;
    }

    void validate() const {
        link.validate();
        if (predictor_link) predictor_link->validate();
        if (rtt_s <= 0) throw std::invalid_argument("config: rtt must be positive");
        if (file_size_bytes <= 0) throw std::invalid_argument("config: bad file size");
        if (theta < 0) throw std::invalid_argument("config: theta must be >= 0");
        if (passes < 1) throw std::invalid_argument("config: need at least one pass");
        if (methods.empty()) throw std::invalid_argument("config: no methods selected");
        for (const auto& m : methods) m.validate();
        if (trace_source.kind == TraceSource::Kind::kCsv &&
            static_cast<int>(trace_source.csv_texts.size()) < passes) {
            throw std::invalid_argument("config: fewer trace files than passes");
        }
    }
};

/// Everything shared by all methods on one pass.
struct PassInputs {
    PassTrace trace;
    BitSnrSeries actual;
    BitSnrSeries predicted;  // two-phase corrected series
    RangeAccuracy prediction_accuracy;
    std::array<double, 5> alpha{};  // actual range occupancy
};

inline PassTrace make_trace(const RunConfig& config, int pass_id) {
    if (config.trace_source.kind == TraceSource::Kind::kSynthetic) {
        return synth_trace(counter_hash(config.master_seed, pass_id),
                           config.trace_source.profile);
    }
    return bspline_resample(parse_trace(config.trace_source.csv_texts.at(pass_id)));
}

inline PassInputs prepare_pass(const RunConfig& config, PassTrace trace) {
    if (trace.duration_s() < config.rtt_s) {
        throw std::invalid_argument("pass: trace shorter than one RTT");
    }
    PassInputs inputs;
    inputs.trace = std::move(trace);
    inputs.actual = actual_snr_series(inputs.trace, config.link);
    const auto prelim =
        preliminary_predict(inputs.trace, config.assumed_link(), config.rtt_s,
                            config.prediction.sky_window_s);
    auto result = predict_pass(inputs.actual.snr_db, prelim, config.predictor_config());
    inputs.predicted = std::move(result.corrected);
    inputs.prediction_accuracy =
        range_prediction_matrix(inputs.actual.snr_db, inputs.predicted.snr_db);
    inputs.alpha = inputs.prediction_accuracy.beta.row_sums();
    return inputs;
}

/// Accounting record for one pass x method run.
struct PassReport {
    int pass_id = 0;
    std::string method;
    std::string y_policy;
    std::uint64_t seed = 0;
    double duration_s = 0.0;

    double b_tx_gb = 0.0, d_tx_gb = 0.0, b_rcvd_gb = 0.0, d_rcvd_gb = 0.0;
    std::int64_t f_tx = 0, f_rcvd_success = 0;
    double f_tx_eqv = 0.0, f_rcvd_eqv = 0.0;
    double accuracy_pct = 0.0;
    BetaMatrix beta;
    std::array<double, 5> alpha{};

    std::int64_t n_tx = 0, n_failures = 0;
    double throughput_sym_per_s = 0.0;  // clean symbols per second
    std::int64_t k_s = 0;               // symbols sent under a correct range
    std::int64_t y_fixed = -1;
    std::int64_t feedback_count = 0, rate_command_count = 0;

    double d_tx_over_b_tx = 0.0, d_rcvd_over_b_tx = 0.0;
    double d_rcvd_over_d_tx = 0.0, d_rcvd_over_b_rcvd = 0.0;

    std::vector<FileRecord> files;
};

/// Cumulative (time, files delivered) step series; nondecreasing by
/// construction and ending at f_rcvd_success.
inline std::vector<std::pair<double, std::int64_t>> delivery_timeline(
    const PassReport& report) {
    std::vector<double> times;
    for (const auto& rec : report.files) {
        if (rec.delivery_s >= 0.0) times.push_back(rec.delivery_s);
    }
    std::sort(times.begin(), times.end());
    std::vector<std::pair<double, std::int64_t>> out;
    out.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        out.emplace_back(times[i], static_cast<std::int64_t>(i) + 1);
    }
    return out;
}

namespace detail {

inline void check_report_identities(const PassReport& report,
                                    const ProtocolConfig& protocol, bool fountain) {
    if (report.b_rcvd_gb > report.b_tx_gb) {
        throw std::logic_error("report: received more channel bits than transmitted");
    }
    const double content_bits = fountain
                                    ? static_cast<double>(protocol.payload_bits())
                                    : static_cast<double>(protocol.block_length);
    const double d_rcvd_expected =
        static_cast<double>(report.n_tx - report.n_failures) * content_bits / 1e9;
    if (std::abs(report.d_rcvd_gb - d_rcvd_expected) > 1e-12 * (1.0 + d_rcvd_expected)) {
        throw std::logic_error("report: clean-symbol data identity violated");
    }
    const double file_gb = static_cast<double>(protocol.file_bits) / 1e9;
    if (report.f_tx_eqv != report.d_tx_gb / file_gb ||
        report.f_rcvd_eqv != report.d_rcvd_gb / file_gb) {
        throw std::logic_error("report: file-equivalent identity violated");
    }
}

}  // namespace detail

inline PassReport run_method_on_pass(const RunConfig& config, const PassInputs& inputs,
                                     const MethodSpec& spec, int pass_id,
                                     const YContext& context) {
    const ProtocolConfig protocol = config.protocol_config();
    const std::uint64_t pass_seed = counter_hash(config.master_seed ^ 0x9a55ULL, pass_id);

    const std::vector<double>& basis = spec.method == Method::kDcsm
                                           ? inputs.predicted.snr_db
                                           : inputs.actual.snr_db;
    const auto schedule = rate_command_source(spec.method, basis, config.rtt_s);

    PassOutcome outcome;
    std::int64_t y_fixed = -1;
    if (spec.uses_fountain()) {
        if (spec.y_policy == YPolicy::kFixedY || spec.y_policy == YPolicy::kFixed2Y ||
            spec.y_policy == YPolicy::kFixedYmin) {
            y_fixed = compute_fixed_y(spec, protocol, context);
        }
        outcome = run_fountain_pass(spec, protocol, inputs.actual.snr_db, schedule,
                                    y_fixed, pass_seed);
    } else {
        outcome = run_adu_pass(spec, protocol, inputs.actual.snr_db, schedule, pass_seed);
    }

    PassReport report;
    report.pass_id = pass_id;
    report.method = spec.name();
    report.y_policy = spec.policy_name();
    report.seed = pass_seed;
    report.duration_s = static_cast<double>(inputs.trace.duration_s());
    report.b_tx_gb = static_cast<double>(outcome.b_tx_bits) / 1e9;
    report.d_tx_gb = static_cast<double>(outcome.d_tx_bits) / 1e9;
    report.b_rcvd_gb = static_cast<double>(outcome.b_rcvd_bits) / 1e9;
    report.d_rcvd_gb = static_cast<double>(outcome.d_rcvd_bits) / 1e9;
    report.f_tx = outcome.files_tx;
    report.f_rcvd_success = outcome.files_success;
    const double file_gb = static_cast<double>(protocol.file_bits) / 1e9;
    report.f_tx_eqv = report.d_tx_gb / file_gb;
    report.f_rcvd_eqv = report.d_rcvd_gb / file_gb;
    report.alpha = inputs.alpha;

    switch (spec.method) {
        case Method::kDcsm:
            report.beta = inputs.prediction_accuracy.beta;
            report.accuracy_pct = inputs.prediction_accuracy.accuracy_pct;
            break;
        case Method::kGenie1:
        case Method::kGenie2:
            report.beta = BetaMatrix::diagonal(inputs.alpha);
            report.accuracy_pct = 100.0;
            break;
        case Method::kStatic1:
        case Method::kStatic2:
            // The static method behaves like a predictor that always says E.
            for (int i = 0; i < 5; ++i) report.beta.p[i][4] = inputs.alpha[i];
            report.accuracy_pct = 100.0 * inputs.alpha[4];
            break;
    }

    report.n_tx = outcome.frames_tx;
    report.n_failures = outcome.frames_tx - outcome.frames_clean;
    report.throughput_sym_per_s =
        report.duration_s > 0.0
            ? static_cast<double>(outcome.frames_clean) / report.duration_s
            : 0.0;
    report.k_s = outcome.symbols_correct_rate;
    report.y_fixed = outcome.y_fixed;
    report.feedback_count = outcome.feedback_count;
    report.rate_command_count = outcome.rate_command_count;

    auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
    report.d_tx_over_b_tx = ratio(report.d_tx_gb, report.b_tx_gb);
    report.d_rcvd_over_b_tx = ratio(report.d_rcvd_gb, report.b_tx_gb);
    report.d_rcvd_over_d_tx = ratio(report.d_rcvd_gb, report.d_tx_gb);
    report.d_rcvd_over_b_rcvd = ratio(report.d_rcvd_gb, report.b_rcvd_gb);
    report.files = std::move(outcome.files);

    detail::check_report_identities(report, protocol, spec.uses_fountain());
    const auto timeline = delivery_timeline(report);
    if (!timeline.empty() && timeline.back().second != report.f_rcvd_success) {
        throw std::logic_error("report: delivery timeline does not end at F_RcvdSuccess");
    }
    return report;
}

/// One pass, one method, self-contained: the pass's own statistics provide
/// the fixed-y context.
inline PassReport run_pass(const RunConfig& config, PassTrace trace,
                           const MethodSpec& spec, int pass_id = 0) {
    config.validate();
    const auto inputs = prepare_pass(config, std::move(trace));
    YContext context;
    context.previous_beta = inputs.prediction_accuracy.beta;
    context.previous_alpha = inputs.alpha;
    return run_method_on_pass(config, inputs, spec, pass_id, context);
}

struct MethodSummary {
    std::string method;
    std::string y_policy;
    int passes = 0;
    double mean_b_tx_gb = 0.0, mean_d_tx_gb = 0.0;
    double mean_b_rcvd_gb = 0.0, mean_d_rcvd_gb = 0.0;
    double mean_f_tx = 0.0, mean_f_rcvd_success = 0.0;
    double median_f_rcvd_success = 0.0;
    double mean_f_tx_eqv = 0.0, mean_f_rcvd_eqv = 0.0;
    double mean_accuracy_pct = 0.0;
    double mean_d_tx_over_b_tx = 0.0, mean_d_rcvd_over_d_tx = 0.0;
};

struct EnsembleResult {
    std::vector<PassReport> reports;  // pass-major, method-minor order
    std::vector<MethodSummary> summaries;

    const MethodSummary& summary_for(std::string_view method,
                                     std::string_view policy) const {
        for (const auto& s : summaries) {
            if (s.method == method && (policy.empty() || s.y_policy == policy)) return s;
        }
        throw std::out_of_range("no summary for requested method");
    }

    /// Mean F_RcvdSuccess improvement of method a over method b, percent.
    double improvement_pct(const MethodSummary& a, const MethodSummary& b) const {
        return (a.mean_f_rcvd_success - b.mean_f_rcvd_success) /
               b.mean_f_rcvd_success * 100.0;
    }
};

inline EnsembleResult run_ensemble(const RunConfig& config) {
    config.validate();
    const int passes = config.passes;
    const auto n_methods = config.methods.size();

    // Phase 1: per-pass prediction statistics (the fixed-y context chain).
    std::vector<BetaMatrix> betas(passes);
    std::vector<std::array<double, 5>> alphas(passes);
    auto stats_worker = [&](int pass_id) {
        const auto inputs = prepare_pass(config, make_trace(config, pass_id));
        betas[pass_id] = inputs.prediction_accuracy.beta;
        alphas[pass_id] = inputs.alpha;
    };

    // Phase 2: all methods on each pass, previous-pass context attached.
    std::vector<PassReport> reports(passes * n_methods);
    auto pass_worker = [&](int pass_id) {
        const auto inputs = prepare_pass(config, make_trace(config, pass_id));
        const int prev = pass_id > 0 ? pass_id - 1 : 0;
        YContext context;
        context.previous_beta = betas[prev];
        context.previous_alpha = alphas[prev];
        for (std::size_t m = 0; m < n_methods; ++m) {
            reports[pass_id * n_methods + m] =
                run_method_on_pass(config, inputs, config.methods[m], pass_id, context);
        }
    };

    auto parallel_for = [&](auto&& body) {
        const int workers = std::max(1, std::min<int>(config.jobs, passes));
        if (workers == 1) {
            for (int i = 0; i < passes; ++i) body(i);
            return;
        }
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < passes; i = next.fetch_add(1)) {
                    body(i);
                }
            });
        }
        for (auto& t : pool) t.join();
    };

    parallel_for(stats_worker);
    parallel_for(pass_worker);

    EnsembleResult result;
    result.reports = std::move(reports);
    for (std::size_t m = 0; m < n_methods; ++m) {
        MethodSummary s;
        s.method = config.methods[m].name();
        s.y_policy = config.methods[m].policy_name();
        s.passes = passes;
        std::vector<double> successes;
        for (int p = 0; p < passes; ++p) {
            const auto& r = result.reports[p * n_methods + m];
            s.mean_b_tx_gb += r.b_tx_gb;
            s.mean_d_tx_gb += r.d_tx_gb;
            s.mean_b_rcvd_gb += r.b_rcvd_gb;
            s.mean_d_rcvd_gb += r.d_rcvd_gb;
            s.mean_f_tx += static_cast<double>(r.f_tx);
            s.mean_f_rcvd_success += static_cast<double>(r.f_rcvd_success);
            s.mean_f_tx_eqv += r.f_tx_eqv;
            s.mean_f_rcvd_eqv += r.f_rcvd_eqv;
            s.mean_accuracy_pct += r.accuracy_pct;
            s.mean_d_tx_over_b_tx += r.d_tx_over_b_tx;
            s.mean_d_rcvd_over_d_tx += r.d_rcvd_over_d_tx;
            successes.push_back(static_cast<double>(r.f_rcvd_success));
        }
        const double n = static_cast<double>(passes);
        s.mean_b_tx_gb /= n;
        s.mean_d_tx_gb /= n;
        s.mean_b_rcvd_gb /= n;
        s.mean_d_rcvd_gb /= n;
        s.mean_f_tx /= n;
        s.mean_f_rcvd_success /= n;
        s.mean_f_tx_eqv /= n;
        s.mean_f_rcvd_eqv /= n;
        s.mean_accuracy_pct /= n;
        s.mean_d_tx_over_b_tx /= n;
        s.mean_d_rcvd_over_d_tx /= n;
        std::sort(successes.begin(), successes.end());
        s.median_f_rcvd_success =
            0.5 * (successes[passes / 2] + successes[(passes - 1) / 2]);
        result.summaries.push_back(std::move(s));
    }
    return result;
}

}  // namespace dcsm

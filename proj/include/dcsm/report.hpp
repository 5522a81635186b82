#pragma once

#include <cstdio>
#include <string>

#include <json.hpp>

#include "dcsm/simulation.hpp"

namespace dcsm {

inline constexpr std::string_view kReportCsvHeader =
    "pass_id,method,y_policy,B_Tx_Gb,D_Tx_Gb,B_Rcvd_Gb,D_Rcvd_Gb,F_Tx,"
    "F_RcvdSuccess,F_TxEqv,F_RcvdEqv,accuracy_pct,seed";

namespace detail {
inline std::string fixed6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}
inline std::string fixed3(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}
}  // namespace detail

inline std::string report_csv_row(const PassReport& r) {
    std::string row;
    row += std::to_string(r.pass_id);
    row += ',';
    row += r.method;
    row += ',';
    row += r.y_policy;
    row += ',';
    row += detail::fixed6(r.b_tx_gb);
    row += ',';
    row += detail::fixed6(r.d_tx_gb);
    row += ',';
    row += detail::fixed6(r.b_rcvd_gb);
    row += ',';
    row += detail::fixed6(r.d_rcvd_gb);
    row += ',';
    row += std::to_string(r.f_tx);
    row += ',';
    row += std::to_string(r.f_rcvd_success);
    row += ',';
    row += detail::fixed6(r.f_tx_eqv);
    row += ',';
    row += detail::fixed6(r.f_rcvd_eqv);
    row += ',';
    row += detail::fixed3(r.accuracy_pct);
    row += ',';
    row += std::to_string(r.seed);
    return row;
}

inline std::string reports_to_csv(const std::vector<PassReport>& reports) {
    std::string out(kReportCsvHeader);
    out.push_back('\n');
    for (const auto& r : reports) {
        out += report_csv_row(r);
        out.push_back('\n');
    }
    return out;
}

inline nlohmann::json report_to_json(const PassReport& r) {
    nlohmann::json j;
    j["pass_id"] = r.pass_id;
    j["method"] = r.method;
    j["y_policy"] = r.y_policy;
    j["seed"] = r.seed;
    j["duration_s"] = r.duration_s;
    j["B_Tx_Gb"] = r.b_tx_gb;
    j["D_Tx_Gb"] = r.d_tx_gb;
    j["B_Rcvd_Gb"] = r.b_rcvd_gb;
    j["D_Rcvd_Gb"] = r.d_rcvd_gb;
    j["F_Tx"] = r.f_tx;
    j["F_RcvdSuccess"] = r.f_rcvd_success;
    j["F_TxEqv"] = r.f_tx_eqv;
    j["F_RcvdEqv"] = r.f_rcvd_eqv;
    j["accuracy_pct"] = r.accuracy_pct;
    j["n_tx"] = r.n_tx;
    j["n_failures"] = r.n_failures;
    j["throughput_sym_per_s"] = r.throughput_sym_per_s;
    j["k_s"] = r.k_s;
    j["y_fixed"] = r.y_fixed;
    j["feedback_count"] = r.feedback_count;
    j["rate_command_count"] = r.rate_command_count;
    j["ratios"] = {{"D_Tx/B_Tx", r.d_tx_over_b_tx},
                   {"D_Rcvd/B_Tx", r.d_rcvd_over_b_tx},
                   {"D_Rcvd/D_Tx", r.d_rcvd_over_d_tx},
                   {"D_Rcvd/B_Rcvd", r.d_rcvd_over_b_rcvd}};
    j["alpha"] = r.alpha;
    nlohmann::json beta = nlohmann::json::array();
    for (int i = 0; i < 5; ++i) {
        beta.push_back(r.beta.p[i]);
    }
    j["beta"] = beta;
    nlohmann::json files = nlohmann::json::array();
    for (const auto& rec : r.files) {
        files.push_back({{"file_id", rec.file_id},
                         {"y_m", rec.y_m},
                         {"symbols_sent", rec.symbols_sent},
                         {"clean_received", rec.clean_received},
                         {"lost", rec.lost},
                         {"decoded", rec.status == FileRecord::Status::kDecoded},
                         {"first_tx_s", rec.first_tx_s},
                         {"delivery_s", rec.delivery_s}});
    }
    j["files"] = files;
    return j;
}

inline nlohmann::json summary_to_json(const MethodSummary& s) {
    nlohmann::json j;
    j["method"] = s.method;
    j["y_policy"] = s.y_policy;
    j["passes"] = s.passes;
    j["mean_B_Tx_Gb"] = s.mean_b_tx_gb;
    j["mean_D_Tx_Gb"] = s.mean_d_tx_gb;
    j["mean_B_Rcvd_Gb"] = s.mean_b_rcvd_gb;
    j["mean_D_Rcvd_Gb"] = s.mean_d_rcvd_gb;
    j["mean_F_Tx"] = s.mean_f_tx;
    j["mean_F_RcvdSuccess"] = s.mean_f_rcvd_success;
    j["median_F_RcvdSuccess"] = s.median_f_rcvd_success;
    j["mean_F_TxEqv"] = s.mean_f_tx_eqv;
    j["mean_F_RcvdEqv"] = s.mean_f_rcvd_eqv;
    j["mean_accuracy_pct"] = s.mean_accuracy_pct;
    j["mean_D_Tx_over_B_Tx"] = s.mean_d_tx_over_b_tx;
    j["mean_D_Rcvd_over_D_Tx"] = s.mean_d_rcvd_over_d_tx;
    return j;
}

inline nlohmann::json ensemble_to_json(const EnsembleResult& result,
                                       bool include_files = false) {
    nlohmann::json j;
    j["summaries"] = nlohmann::json::array();
    for (const auto& s : result.summaries) j["summaries"].push_back(summary_to_json(s));
    j["passes"] = nlohmann::json::array();
    for (const auto& r : result.reports) {
        auto jr = report_to_json(r);
        if (!include_files) jr.erase("files");
        j["passes"].push_back(std::move(jr));
    }
    return j;
}

/// Fig-style plot data: one CSV of the cumulative delivery step series.
inline std::string delivery_timeline_csv(const PassReport& report) {
    std::string out = "time_s,files_delivered\n";
    for (const auto& [time, count] : delivery_timeline(report)) {
        out += detail::fixed3(time);
        out += ',';
        out += std::to_string(count);
        out.push_back('\n');
    }
    return out;
}

/// Fig-style plot data: actual vs predicted bit-SNR series.
inline std::string snr_series_csv(const PassInputs& inputs) {
    std::string out = "t_s,actual_snr_db,predicted_snr_db\n";
    for (std::size_t t = 0; t < inputs.actual.size(); ++t) {
        out += std::to_string(t);
        out += ',';
        out += detail::fixed6(inputs.actual[t]);
        out += ',';
        out += detail::fixed6(inputs.predicted[t]);
        out.push_back('\n');
    }
    return out;
}

}  // namespace dcsm

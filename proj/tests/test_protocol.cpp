#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "dcsm/protocol.hpp"

using namespace dcsm;

namespace {
/// Small-file configuration so protocol mechanics are observable directly:
/// K_S = 10 source symbols of 8888 bits.
ProtocolConfig small_files() {
    ProtocolConfig config;
    config.file_bits = 8888 * 10;
    config.theta = 0;
    config.rtt_s = 2;
    return config;
}

std::vector<double> constant_snr(std::size_t seconds, double snr) {
    return std::vector<double>(seconds, snr);
}
}  // namespace

TEST_CASE("method spec parsing") {
    CHECK(MethodSpec::parse("dcsm:fixed_ymin").method == Method::kDcsm);
    CHECK(MethodSpec::parse("dcsm:fixed_ymin").y_policy == YPolicy::kFixedYmin);
    CHECK(MethodSpec::parse("genie1:adaptive_worst").y_policy == YPolicy::kAdaptiveWorst);
    CHECK(MethodSpec::parse("genie2").y_policy == YPolicy::kNone);
    CHECK(MethodSpec::parse("static2").method == Method::kStatic2);
    CHECK_THROWS_AS(MethodSpec::parse("genie2:fixed_y"), std::invalid_argument);
    CHECK_THROWS_AS(MethodSpec::parse("warp"), std::invalid_argument);
    CHECK(MethodSpec::parse("static1:fixed_2y").name() == "static1");
    CHECK(MethodSpec::parse("static1:fixed_2y").policy_name() == "fixed_2y");
}

TEST_CASE("command stream generation") {
    SECTION("constant Range E pass produces exactly one command") {
        const auto snr = constant_snr(600, 1.5);
        const auto schedule = rate_command_source(Method::kDcsm, snr, 40);
        REQUIRE(schedule.messages.size() == 1);
        CHECK(schedule.messages[0].kind == ControlMessage::Kind::kRateSelect);
        CHECK(schedule.messages[0].rate_den == 2);
        for (auto den : schedule.rate_den) CHECK(den == 2);
    }

    SECTION("a dropout dip produces halt at entry and CTS at exit") {
        auto snr = constant_snr(300, 1.5);
        for (int t = 100; t < 140; ++t) snr[t] = -1.0;
        const auto schedule = rate_command_source(Method::kGenie1, snr, 40);
        REQUIRE(schedule.messages.size() == 3);
        CHECK(schedule.messages[1].kind == ControlMessage::Kind::kHalt);
        CHECK(schedule.messages[1].send_time_s == Catch::Approx(100.0 - 40.0));
        CHECK(schedule.messages[1].arrival_time_s == Catch::Approx(100.0 - 20.0));
        CHECK(schedule.messages[2].kind == ControlMessage::Kind::kCts);
        CHECK(schedule.messages[2].rate_den == 2);
        for (int t = 0; t < 300; ++t) {
            CHECK(schedule.rate_den[t] == ((t >= 100 && t < 140) ? 0 : 2));
        }
    }

    SECTION("a perfect predictor reproduces the genie command stream") {
        std::vector<double> snr;
        for (int t = 0; t < 900; ++t) {
            snr.push_back(1.8 * std::sin(t / 150.0) + 0.4);
        }
        const auto dcsm = rate_command_source(Method::kDcsm, snr, 1200);
        const auto genie = rate_command_source(Method::kGenie1, snr, 1200);
        REQUIRE(dcsm.messages.size() == genie.messages.size());
        CHECK(dcsm.rate_den == genie.rate_den);
        for (std::size_t i = 0; i < dcsm.messages.size(); ++i) {
            CHECK(dcsm.messages[i].kind == genie.messages[i].kind);
            CHECK(dcsm.messages[i].send_time_s == genie.messages[i].send_time_s);
        }
    }

    SECTION("static issues a single initial command") {
        const auto snr = constant_snr(300, -2.0);  // ignored by static
        const auto schedule = rate_command_source(Method::kStatic1, snr, 40);
        REQUIRE(schedule.messages.size() == 1);
        CHECK(schedule.messages[0].send_time_s == Catch::Approx(-40.0));
        for (auto den : schedule.rate_den) CHECK(den == 2);
    }
}

TEST_CASE("genie II copy counts") {
    CHECK(genie2_copies(1e-7) == 1);
    CHECK(genie2_copies(0.0) == 1);
    CHECK(genie2_copies(0.1, 1e-3) == 3);
    CHECK(genie2_copies(0.5, 1e-3) == 10);
    CHECK_THROWS_AS(genie2_copies(1.0), std::domain_error);
    CHECK_THROWS_AS(genie2_copies(-0.1), std::domain_error);

    // fer^copies <= epsilon < fer^(copies-1) on random inputs.
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
        const double f = rng.uniform(1e-6, 0.95);
        const int m = genie2_copies(f, 1e-3);
        CHECK(std::pow(f, m) <= 1e-3);
        if (m > 1) CHECK(std::pow(f, m - 1) > 1e-3);
    }
}

TEST_CASE("serial file arrangement on a clean pass") {
    ProtocolConfig config = small_files();
    config.theta = 2;  // decode failures vanish at this overhead
    const auto spec = MethodSpec::parse("static1:fixed_y");
    const auto snr = constant_snr(60, 5.0);  // FER at the 1e-7 floor
    const auto schedule = rate_command_source(Method::kStatic1, snr, config.rtt_s);
    const std::int64_t y = 3;

    std::vector<FrameLogEntry> log;
    const auto outcome =
        run_fountain_pass(spec, config, snr, schedule, y, 11, &log);

    const std::int64_t per_file = 10 + 2 + y;
    // Files occupy consecutive blocks of exactly K_S + Theta + y frames.
    for (std::size_t i = 0; i < log.size(); ++i) {
        CHECK(log[i].file_id == static_cast<std::int64_t>(i) / per_file);
    }
    CHECK(outcome.files_success >= outcome.files_tx - 1);  // at most the trailing partial file pending

    // Uniform delivery spacing: each file decodes at its (K_S + Theta)-th
    // clean symbol, one frame slot cadence apart.
    const double slot_s = static_cast<double>(config.frame_duration_us(2)) * 1e-6;
    for (std::int64_t m = 0; m + 1 < outcome.files_success; ++m) {
        const double gap = outcome.files[m + 1].delivery_s - outcome.files[m].delivery_s;
        CHECK(gap == Catch::Approx(per_file * slot_s).margin(1e-6));
    }
    CHECK(outcome.frames_tx == outcome.frames_clean);
    CHECK(outcome.b_tx_bits == outcome.b_rcvd_bits);
    CHECK(outcome.y_fixed == y);
}

TEST_CASE("losses beyond y trigger feedback and a retransmission burst") {
    ProtocolConfig config = small_files();  // rtt 2 s
    config.theta = 2;  // keep fountain-decode retries out of the tally
    const auto spec = MethodSpec::parse("static1:fixed_y");
    auto snr = constant_snr(60, 5.0);
    snr[5] = -5.0;  // every rate-1/2 frame in second 5 is lost
    const auto schedule = rate_command_source(Method::kStatic1, snr, config.rtt_s);
    const std::int64_t y = 2;

    std::vector<FrameLogEntry> log;
    const auto outcome = run_fountain_pass(spec, config, snr, schedule, y, 3, &log);

    // All frames inside the bad second were lost; their files exceed y = 2
    // and each excess loss requested one extra symbol.
    std::int64_t expected_feedback = 0;
    for (const auto& rec : outcome.files) {
        if (rec.lost > y) expected_feedback += rec.lost - y;
    }
    CHECK(outcome.feedback_count == expected_feedback);
    CHECK(expected_feedback > 0);

    // The first damaged file preempts the transmission exactly one RTT after
    // its losses were recorded, and its burst carries lost - y symbols.
    std::int64_t first_damaged = -1;
    for (const auto& rec : outcome.files) {
        if (rec.lost > y) {
            first_damaged = rec.file_id;
            break;
        }
    }
    REQUIRE(first_damaged >= 0);
    std::int64_t burst = 0;
    bool resumed_later_file = false;
    for (const auto& entry : log) {
        if (entry.start_us < 7'000'000) continue;  // loss at ~5 s + RTT
        if (entry.file_id == first_damaged) {
            ++burst;
        } else if (burst > 0) {
            resumed_later_file = true;
            break;
        }
    }
    CHECK(burst == outcome.files[first_damaged].lost - y);
    CHECK(resumed_later_file);

    // Damaged files still decode once their extras arrive.
    for (const auto& rec : outcome.files) {
        if (rec.lost > y && rec.file_id < outcome.files_tx - 5) {
            CHECK(rec.status == FileRecord::Status::kDecoded);
        }
    }
}

TEST_CASE("halt windows emit no frames") {
    const auto config = small_files();
    const auto spec = MethodSpec::parse("dcsm:fixed_y");
    auto predicted = constant_snr(60, 1.5);
    for (int t = 20; t < 30; ++t) predicted[t] = -2.0;
    const auto actual = constant_snr(60, 1.5);
    const auto schedule = rate_command_source(Method::kDcsm, predicted, config.rtt_s);

    std::vector<FrameLogEntry> log;
    run_fountain_pass(spec, config, actual, schedule, 1, 17, &log);
    for (const auto& entry : log) {
        const bool inside_halt =
            entry.start_us >= 20'000'000 && entry.start_us < 30'000'000;
        CHECK(!inside_halt);
    }
}

TEST_CASE("dcsm, genie I and static I coincide on an all-E zero-loss pass") {
    const auto config = small_files();
    const auto snr = constant_snr(45, 5.0);
    const std::int64_t y = y_min_all_range_e(config.calib, 10, 0);

    std::vector<FrameLogEntry> logs[3];
    PassOutcome outcomes[3];
    const MethodSpec specs[3] = {MethodSpec::parse("dcsm:fixed_ymin"),
                                 MethodSpec::parse("genie1:fixed_ymin"),
                                 MethodSpec::parse("static1:fixed_ymin")};
    for (int i = 0; i < 3; ++i) {
        const auto schedule = rate_command_source(specs[i].method, snr, config.rtt_s);
        outcomes[i] = run_fountain_pass(specs[i], config, snr, schedule, y, 77, &logs[i]);
    }
    for (int i = 1; i < 3; ++i) {
        CHECK(outcomes[i].frames_tx == outcomes[0].frames_tx);
        CHECK(outcomes[i].files_success == outcomes[0].files_success);
        CHECK(outcomes[i].b_tx_bits == outcomes[0].b_tx_bits);
        CHECK(outcomes[i].d_rcvd_bits == outcomes[0].d_rcvd_bits);
        REQUIRE(logs[i].size() == logs[0].size());
        for (std::size_t k = 0; k < logs[i].size(); ++k) {
            CHECK(logs[i][k].file_id == logs[0][k].file_id);
            CHECK(logs[i][k].start_us == logs[0][k].start_us);
        }
    }
}

TEST_CASE("adaptive y is computed per file after the theta-th symbol") {
    ProtocolConfig config = small_files();
    config.theta = 2;
    const auto spec = MethodSpec::parse("dcsm:adaptive_average");
    std::vector<double> snr;
    for (int t = 0; t < 90; ++t) snr.push_back(t % 2 == 0 ? 1.2 : 0.5);  // E/D mix
    const auto schedule = rate_command_source(Method::kDcsm, snr, config.rtt_s);

    const auto outcome = run_fountain_pass(spec, config, snr, schedule, -1, 5);
    REQUIRE(outcome.files_tx > 2);
    for (std::int64_t m = 0; m + 1 < outcome.files_tx; ++m) {
        const auto& rec = outcome.files[m];
        CHECK(rec.y_m >= 0);
        CHECK(rec.scheduled == 12 + rec.y_m);
        std::int64_t recorded = 0;
        for (auto c : rec.sent_per_range) recorded += c;
        CHECK(recorded == 12);  // pi covers exactly the first K_S + Theta symbols
    }
    CHECK(outcome.y_fixed == -1);
}

TEST_CASE("adaptive best transmits less margin than adaptive worst") {
    ProtocolConfig config = small_files();
    config.theta = 2;
    std::vector<double> snr;
    for (int t = 0; t < 60; ++t) snr.push_back(t % 3 == 0 ? 0.5 : 1.2);
    const auto schedule = rate_command_source(Method::kDcsm, snr, config.rtt_s);

    const auto best = run_fountain_pass(MethodSpec::parse("dcsm:adaptive_best"), config,
                                        snr, schedule, -1, 5);
    const auto worst = run_fountain_pass(MethodSpec::parse("dcsm:adaptive_worst"), config,
                                         snr, schedule, -1, 5);
    REQUIRE(best.files_tx > 1);
    REQUIRE(worst.files_tx > 1);
    CHECK(best.files[0].y_m <= worst.files[0].y_m);
    CHECK(best.files_tx >= worst.files_tx);
}

TEST_CASE("fixed y policies") {
    ProtocolConfig config;  // full-size 50 MB files
    YContext context;
    context.previous_alpha = {0.0, 0.0, 0.0, 0.0, 1.0};
    context.previous_beta = BetaMatrix::all_range_e();

    const auto y_static =
        compute_fixed_y(MethodSpec::parse("static1:fixed_y"), config, context);
    CHECK(y_static == 453);
    CHECK(compute_fixed_y(MethodSpec::parse("static1:fixed_2y"), config, context) == 906);
    CHECK(compute_fixed_y(MethodSpec::parse("dcsm:fixed_ymin"), config, context) == 453);
    CHECK(compute_fixed_y(MethodSpec::parse("genie1:fixed_y"), config, context) == 453);

    // A previous pass with worse ranges demands more margin.
    YContext mixed;
    mixed.previous_beta = BetaMatrix::diagonal({0.0, 0.1, 0.1, 0.2, 0.6});
    const auto y_mixed = compute_fixed_y(MethodSpec::parse("dcsm:fixed_y"), config, mixed);
    CHECK(y_mixed > 453);
}

TEST_CASE("static II divides files into ADUs and tolerates no loss") {
    ProtocolConfig config;
    CHECK(config.static2_adus() == 44844);

    ProtocolConfig small = small_files();
    const std::int64_t adus = small.static2_adus();  // ceil(88880 / 8920) = 10
    CHECK(adus == 10);

    SECTION("clean channel delivers every completed file") {
        const auto snr = constant_snr(30, 5.0);
        const auto schedule = rate_command_source(Method::kStatic2, snr, small.rtt_s);
        const auto outcome = run_adu_pass(MethodSpec::parse("static2"), small, snr,
                                          schedule, 21);
        CHECK(outcome.files_success == outcome.files_tx - 1);  // last file partial
        for (const auto& rec : outcome.files) CHECK(rec.symbols_sent <= adus);
        CHECK(outcome.d_tx_bits ==
              static_cast<std::uint64_t>(outcome.frames_tx) * 8920);
    }

    SECTION("a lossy window fails every file it touches") {
        auto snr = constant_snr(30, 5.0);
        for (int t = 10; t < 12; ++t) snr[t] = -5.0;
        const auto schedule = rate_command_source(Method::kStatic2, snr, small.rtt_s);
        const auto outcome = run_adu_pass(MethodSpec::parse("static2"), small, snr,
                                          schedule, 21);
        bool any_failed = false;
        for (const auto& rec : outcome.files) {
            if (rec.lost > 0) {
                CHECK(rec.status != FileRecord::Status::kDecoded);
                any_failed = true;
            }
        }
        CHECK(any_failed);
    }
}

TEST_CASE("genie II replicates packets against the known FER") {
    ProtocolConfig small = small_files();
    auto snr = constant_snr(40, 5.0);
    for (int t = 10; t < 20; ++t) snr[t] = 0.9;  // FER(1/2) noticeable but < 1
    const auto schedule = rate_command_source(Method::kGenie2, snr, small.rtt_s);
    const auto outcome =
        run_adu_pass(MethodSpec::parse("genie2"), small, snr, schedule, 9);

    // Replication shows up as more frames than distinct ADUs.
    std::int64_t distinct = 0;
    for (const auto& rec : outcome.files) distinct += rec.scheduled;
    CHECK(outcome.frames_tx > outcome.files_tx * 10 - 10);
    CHECK(outcome.files_success > 0);

    // Dropout seconds are skipped entirely.
    auto dipped = snr;
    for (int t = 25; t < 30; ++t) dipped[t] = -3.0;
    const auto halted_schedule = rate_command_source(Method::kGenie2, dipped, small.rtt_s);
    const auto halted = run_adu_pass(MethodSpec::parse("genie2"), small, dipped,
                                     halted_schedule, 9);
    CHECK(halted.frames_tx < outcome.frames_tx);
}

TEST_CASE("accounting conservation invariants") {
    const auto config = small_files();
    auto snr = constant_snr(90, 1.5);
    for (int t = 30; t < 45; ++t) snr[t] = 0.0;   // Range C stretch
    for (int t = 60; t < 70; ++t) snr[t] = -0.8;  // dropout for the genie
    for (const char* name : {"dcsm:fixed_ymin", "genie1:fixed_y", "static1:fixed_2y"}) {
        const auto spec = MethodSpec::parse(name);
        const auto schedule = rate_command_source(spec.method, snr, config.rtt_s);
        YContext context;
        context.previous_beta = BetaMatrix::all_range_e();
        context.previous_alpha = {0, 0, 0, 0, 1.0};
        const auto y = compute_fixed_y(spec, config, context);
        const auto outcome = run_fountain_pass(spec, config, snr, schedule, y, 13);

        CHECK(outcome.b_rcvd_bits <= outcome.b_tx_bits);
        CHECK(outcome.d_rcvd_bits <= outcome.d_tx_bits);
        CHECK(outcome.d_tx_bits ==
              static_cast<std::uint64_t>(outcome.frames_tx) * config.payload_bits());
        CHECK(outcome.d_rcvd_bits ==
              static_cast<std::uint64_t>(outcome.frames_clean) * config.payload_bits());
        std::int64_t symbols = 0;
        for (const auto& rec : outcome.files) symbols += rec.symbols_sent;
        CHECK(symbols == outcome.frames_tx);
        CHECK(outcome.files_success <= outcome.files_tx);
    }
}

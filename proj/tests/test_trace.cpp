#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include "dcsm/trace.hpp"

using namespace dcsm;

namespace {
std::string rows(std::initializer_list<std::string> lines) {
    std::string text(kTraceCsvHeader);
    text.push_back('\n');
    for (const auto& l : lines) {
        text += l;
        text.push_back('\n');
    }
    return text;
}
}  // namespace

TEST_CASE("parse_trace accepts a minimal valid trace") {
    const auto trace = parse_trace(rows({"0,5.0,10,120", "30,5.2,20,121",
                                         "60,5.1,30,122", "90,4.9,40,123"}));
    REQUIRE(trace.samples.size() == 4);
    CHECK(trace.samples[1].wet_delay_cm == 5.2);
    CHECK(trace.samples[3].elevation_deg == 40.0);
}

TEST_CASE("parse_trace rejects bad input with line numbers") {
    CHECK_THROWS_AS(parse_trace("nonsense\n"), ParseError);
    CHECK_THROWS_AS(parse_trace(rows({"0,5,10"})), ParseError);
    CHECK_THROWS_MATCHES(
        parse_trace(rows({"0,5,10,0", "30,x,20,0", "60,5,30,0", "90,5,40,0"})),
        ParseError, Catch::Matchers::MessageMatches(
                        Catch::Matchers::ContainsSubstring("line 3")));

    // Elevation out of range.
    CHECK_THROWS_AS(
        parse_trace(rows({"0,5,10,0", "30,5,95,0", "60,5,30,0", "90,5,40,0"})),
        ValidationError);
    // Duplicate timestamp.
    CHECK_THROWS_AS(
        parse_trace(rows({"0,5,10,0", "30,5,20,0", "30,5,30,0", "90,5,40,0"})),
        ValidationError);
    // Too short for a cubic spline.
    CHECK_THROWS_AS(parse_trace(rows({"0,5,10,0", "30,5,20,0", "60,5,30,0"})),
                    ValidationError);
}

TEST_CASE("resampling interpolates the original knots") {
    RawTrace raw;
    for (int k = 0; k < 20; ++k) {
        raw.samples.push_back({30.0 * k, 5.0 + std::sin(0.3 * k), 10.0 + 3.0 * k, 0.0});
    }
    const auto pass = bspline_resample(raw);
    REQUIRE(pass.duration_s() == 30 * 19);
    for (int k = 0; k < 20; ++k) {
        CHECK(pass.wet_delay_cm[30 * k] ==
              Catch::Approx(raw.samples[k].wet_delay_cm).epsilon(1e-9));
        CHECK(pass.elevation_deg[30 * k] ==
              Catch::Approx(raw.samples[k].elevation_deg).epsilon(1e-9));
    }
    CHECK_THROWS_AS(bspline_resample(raw, 0.0), std::domain_error);
}

TEST_CASE("resampling is exact on cubic polynomials") {
    auto cubic = [](double t) { return 5.0 + 0.02 * t + 1e-4 * t * t - 1e-7 * t * t * t; };
    RawTrace raw;
    for (int k = 0; k <= 20; ++k) {
        raw.samples.push_back({30.0 * k, cubic(30.0 * k), 45.0, 0.0});
    }
    const auto pass = bspline_resample(raw);
    for (std::size_t t = 0; t < pass.size(); ++t) {
        CHECK(pass.wet_delay_cm[t] ==
              Catch::Approx(cubic(static_cast<double>(t))).margin(1e-6));
    }
}

TEST_CASE("resampling error against a dense analytic signal") {
    RawTrace raw;
    for (int k = 0; k <= 40; ++k) {
        const double t = 30.0 * k;
        raw.samples.push_back(
            {t, 6.0 + std::sin(2.0 * std::numbers::pi * t / 600.0), 45.0, 0.0});
    }
    const auto pass = bspline_resample(raw);
    double sq = 0.0;
    for (std::size_t t = 0; t < pass.size(); ++t) {
        const double truth =
            6.0 + std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 600.0);
        sq += (pass.wet_delay_cm[t] - truth) * (pass.wet_delay_cm[t] - truth);
    }
    CHECK(std::sqrt(sq / pass.size()) < 1e-3);
}

TEST_CASE("resampling overshoot on monotone segments stays below 5%") {
    RawTrace raw;
    const double values[] = {1.0, 1.1, 1.3, 2.1, 3.9, 4.6, 4.9, 5.0};
    for (int k = 0; k < 8; ++k) raw.samples.push_back({30.0 * k, values[k], 45.0, 0.0});
    const auto pass = bspline_resample(raw);
    double lo = 1e300, hi = -1e300;
    for (double v : pass.wet_delay_cm) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double range = 5.0 - 1.0;
    CHECK(lo > 1.0 - 0.05 * range);
    CHECK(hi < 5.0 + 0.05 * range);
}

TEST_CASE("synthetic traces are reproducible and well-scaled") {
    SynthProfile profile;
    profile.duration_s = 3600.0;

    SECTION("same seed, same trace") {
        const auto a = synth_trace(99, profile);
        const auto b = synth_trace(99, profile);
        CHECK(a.wet_delay_cm == b.wet_delay_cm);
        CHECK(a.elevation_deg == b.elevation_deg);
    }

    SECTION("zero volatility and no storms collapse to the mean") {
        SynthProfile flat = profile;
        flat.ou_volatility_cm = 0.0;
        flat.storm_probability = 0.0;
        const auto t = synth_trace(5, flat);
        for (double v : t.wet_delay_cm) CHECK(v == Catch::Approx(flat.ou_mean_cm));
    }

    SECTION("elevation follows a rise-peak-set arc") {
        const auto t = synth_trace(5, profile);
        CHECK(t.elevation_deg.front() == Catch::Approx(10.0).margin(1e-6));
        CHECK(t.elevation_deg.back() == Catch::Approx(10.0).margin(1e-6));
        const auto mid = t.elevation_deg[t.size() / 2];
        CHECK(mid == Catch::Approx(profile.peak_elevation_deg).margin(0.1));
        for (double v : t.elevation_deg) CHECK((v > 0.0 && v <= 90.0));
    }

    SECTION("ensemble mean of the wet delay tracks the configured mean") {
        SynthProfile calm = profile;
        calm.storm_probability = 0.0;  // storm bumps are additive, skip them here
        double total = 0.0;
        std::size_t count = 0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto t = synth_trace(seed, calm);
            for (double v : t.wet_delay_cm) total += v;
            count += t.size();
        }
        CHECK(total / count == Catch::Approx(calm.ou_mean_cm).epsilon(0.10));
    }

    SECTION("invalid profiles are rejected") {
        SynthProfile bad = profile;
        bad.duration_s = 100.0;
        CHECK_THROWS_AS(synth_trace(1, bad), std::domain_error);
        bad = profile;
        bad.peak_elevation_deg = 95.0;
        CHECK_THROWS_AS(synth_trace(1, bad), std::domain_error);
    }
}

TEST_CASE("synthetic trace survives the CSV round trip on the 1 s grid") {
    SynthProfile profile;
    profile.duration_s = 1800.0;
    const auto original = synth_trace(7, profile);
    const std::string csv = write_trace_csv(original);
    const auto reparsed = bspline_resample(parse_trace(csv));
    REQUIRE(reparsed.size() == original.size());
    for (std::size_t t = 0; t < original.size(); ++t) {
        CHECK(reparsed.wet_delay_cm[t] ==
              Catch::Approx(original.wet_delay_cm[t]).margin(1e-9));
        CHECK(reparsed.elevation_deg[t] ==
              Catch::Approx(original.elevation_deg[t]).margin(1e-9));
    }
}

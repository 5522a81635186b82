#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "dcsm/link_budget.hpp"
#include "dcsm/rng.hpp"

using namespace dcsm;

namespace {
LinkBudgetParams table_defaults() { return LinkBudgetParams{}; }
}  // namespace

TEST_CASE("opacity from wet delay is the configured affine map") {
    CHECK(opacity_from_wet_delay(0.0) == Catch::Approx(0.035));
    CHECK(opacity_from_wet_delay(10.0) == Catch::Approx(0.075));
    CHECK(opacity_from_wet_delay(5.0) <= opacity_from_wet_delay(10.0));
    CHECK_THROWS_AS(opacity_from_wet_delay(-1.0), std::domain_error);
}

TEST_CASE("sky temperature from opacity") {
    CHECK(sky_temp_from_opacity(0.0) == Catch::Approx(3.0));
    CHECK(sky_temp_from_opacity(0.05) ==
          Catch::Approx(275.0 - 272.0 * std::exp(-0.05)).epsilon(1e-12));
    CHECK(sky_temp_from_opacity(0.05) == Catch::Approx(16.266).margin(5e-4));
    CHECK(sky_temp_from_opacity(20.0) == Catch::Approx(275.0).margin(1e-5));
    CHECK(sky_temp_from_opacity(20.0) < 275.0);
    CHECK_THROWS_AS(sky_temp_from_opacity(-0.01), std::domain_error);
}

TEST_CASE("zenith atmospheric temperature chain") {
    CHECK(atm_temp_31(kCosmicBackgroundK) == Catch::Approx(0.0).margin(1e-12));
    CHECK(atm_temp_31(275.0) == Catch::Approx(275.0));
    const double sky = sky_temp_from_opacity(0.05);
    const double t31 = atm_temp_31(sky);
    CHECK(t31 == Catch::Approx(275.0 * (sky - 2.725) / (275.0 - 2.725)).epsilon(1e-12));
    CHECK(t31 == Catch::Approx(13.676).margin(1e-3));
    CHECK_THROWS_AS(atm_temp_31(2.0), std::domain_error);

    CHECK(atm_temp_32(0.0) == Catch::Approx(0.0));
    CHECK(atm_temp_32(t31) ==
          Catch::Approx(t31 + 5.0 * (1.0 - std::exp(-0.008 * t31))).epsilon(1e-12));
    CHECK(atm_temp_32(t31) == Catch::Approx(14.194).margin(1e-3));
    // The 32 GHz excess stays below 5 K.
    for (double t : {0.0, 1.0, 40.0, 150.0, 274.0}) {
        CHECK(atm_temp_32(t) - t >= 0.0);
        CHECK(atm_temp_32(t) - t < 5.0);
    }
}

TEST_CASE("slant attenuation formula") {
    CHECK(atm_attenuation(0.0, 90.0) == Catch::Approx(1.0));
    CHECK(atm_attenuation(137.5, 90.0) == Catch::Approx(2.0));
    CHECK(atm_attenuation(0.0, 30.0) == Catch::Approx(2.0));
    // Strictly increases as elevation drops.
    CHECK(atm_attenuation(20.0, 40.0) > atm_attenuation(20.0, 60.0));
    CHECK_THROWS_AS(atm_attenuation(275.0, 45.0), std::domain_error);
    CHECK_THROWS_AS(atm_attenuation(10.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(atm_attenuation(10.0, -5.0), std::domain_error);

    CHECK(attenuation_db_from_raw(2.0, AttenuationInterpretation::kPaper) ==
          Catch::Approx(2.0));
    CHECK(attenuation_db_from_raw(2.0, AttenuationInterpretation::kPhysical) ==
          Catch::Approx(10.0 * std::log10(2.0)));
}

TEST_CASE("operating noise temperature") {
    LinkBudgetParams p = table_defaults();
    p.antenna_noise_t1_k = 14.0;
    p.antenna_noise_t2_k = 0.0;
    CHECK(operating_noise_temp(p, 0.0, 45.0) == Catch::Approx(16.725));

    p.antenna_noise_t2_k = 10.0;
    p.cumulative_distribution = 0.5;
    const double loss = std::pow(10.0, 0.1);
    const double expected = 14.0 + 10.0 * std::exp(-0.1 * 30.0) +
                            267.5 * (1.0 - 1.0 / loss) + 2.725 / loss;
    CHECK(operating_noise_temp(p, 1.0, 30.0) == Catch::Approx(expected).epsilon(1e-12));
    CHECK(operating_noise_temp(p, 1.0, 30.0) == Catch::Approx(71.68).margin(0.02));

    // T_M grows with CD, so T_op grows at fixed loss > 1.
    LinkBudgetParams hi = p;
    hi.cumulative_distribution = 0.9;
    CHECK(operating_noise_temp(hi, 1.0, 30.0) > operating_noise_temp(p, 1.0, 30.0));
    CHECK_THROWS_AS(operating_noise_temp(p, -0.1, 30.0), std::domain_error);
}

TEST_CASE("received power matches the link budget") {
    const LinkBudgetParams p = table_defaults();
    const double spreading = kSpeedOfLight / (4.0 * std::numbers::pi * 32.0e9 * 18.0e10);
    const double expected =
        34.0 * std::pow(10.0, 5.64) * spreading * spreading * std::pow(10.0, 7.9);
    CHECK(received_power(p, 0.0) == Catch::Approx(expected).epsilon(1e-12));
    CHECK(received_power(p, 0.0) == Catch::Approx(2.025e-14).epsilon(1e-3));

    LinkBudgetParams far = p;
    far.distance_m *= 2.0;
    CHECK(received_power(far, 0.0) == Catch::Approx(received_power(p, 0.0) / 4.0));
    CHECK(received_power(p, 3.0103) ==
          Catch::Approx(received_power(p, 0.0) / 2.0).epsilon(1e-5));
}

TEST_CASE("bit snr") {
    LinkBudgetParams p = table_defaults();

    SECTION("all power to data at 90 degree modulation index") {
        p.modulation_index_deg = 89.9999999;
        const double snr = bit_snr_db(p, 2.0e-14, 40.0);
        const double expected =
            linear_to_db(2.0e-14 / (kBoltzmann * 40.0 * p.channel_rate_bps));
        CHECK(snr == Catch::Approx(expected).margin(1e-6));
    }

    SECTION("worked example") {
        const double snr = bit_snr_db(p, 2.025e-14, 40.0);
        const double s = std::sin(deg_to_rad(21.09375));
        const double linear = 2.025e-14 * s * s / (kBoltzmann * 40.0 * 3.0e6);
        CHECK(linear == Catch::Approx(1.583).epsilon(1e-3));
        CHECK(snr == Catch::Approx(1.996).margin(2e-3));
    }

    SECTION("doubling the channel rate subtracts 3.0103 dB") {
        const double base = bit_snr_db(p, 1.0e-14, 50.0);
        p.channel_rate_bps *= 2.0;
        CHECK(base - bit_snr_db(p, 1.0e-14, 50.0) ==
              Catch::Approx(10.0 * std::log10(2.0)).epsilon(1e-12));
    }

    CHECK_THROWS_AS(bit_snr_db(p, 0.0, 40.0), std::domain_error);
    CHECK_THROWS_AS(bit_snr_db(p, 1e-14, 0.0), std::domain_error);
}

TEST_CASE("snr pipeline composes the stages") {
    LinkBudgetParams p = table_defaults();
    p.attenuation_interpretation = AttenuationInterpretation::kPhysical;

    SECTION("constant inputs give constant output of input shape") {
        std::vector<double> wet(100, 6.0), elev(100, 75.0);
        const auto series = snr_pipeline(p, wet, elev);
        REQUIRE(series.size() == 100);
        for (std::size_t i = 1; i < series.size(); ++i) {
            CHECK(series[i] == series[0]);
        }
    }

    SECTION("pipeline equals manual stage composition at every sample") {
        Rng rng(42);
        std::vector<double> wet, elev;
        for (int i = 0; i < 50; ++i) {
            wet.push_back(rng.uniform(0.0, 40.0));
            elev.push_back(rng.uniform(5.0, 90.0));
        }
        const auto series = snr_pipeline(p, wet, elev);
        for (std::size_t i = 0; i < wet.size(); ++i) {
            const double tau = opacity_from_wet_delay(wet[i]);
            const double sky = sky_temp_from_opacity(tau);
            const double t32 = atm_temp_32(atm_temp_31(sky));
            const double l_db = attenuation_db_from_raw(
                atm_attenuation(t32, elev[i]), p.attenuation_interpretation);
            const double snr = bit_snr_db(p, received_power(p, l_db),
                                          operating_noise_temp(p, l_db, elev[i]));
            CHECK(series[i] == Catch::Approx(snr).epsilon(1e-14));
        }
    }

    SECTION("bit snr in dB is affine in transmit power dB") {
        std::vector<double> wet(3, 10.0), elev(3, 60.0);
        const auto base = snr_pipeline(p, wet, elev);
        LinkBudgetParams boosted = p;
        boosted.transmit_power_w *= std::pow(10.0, 0.73);  // +7.3 dB
        const auto shifted = snr_pipeline(boosted, wet, elev);
        CHECK(shifted[0] - base[0] == Catch::Approx(7.3).epsilon(1e-9));
    }

    SECTION("mismatched series lengths are rejected") {
        std::vector<double> wet(4, 1.0), elev(5, 45.0);
        CHECK_THROWS_AS(snr_pipeline(p, wet, elev), std::invalid_argument);
    }
}

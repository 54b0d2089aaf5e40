#include "aoi/link_oma.hpp"

#include <doctest.h>

#include <cmath>

using namespace aoi;

namespace {
const QuantizedChannel kQ4 = quantize_equiprobable(FadingModel::rayleigh(), 4);
const QuantizedChannel kQ8 = quantize_equiprobable(FadingModel::rayleigh(), 8);
}  // namespace

TEST_CASE("power design targets the lower edge of the next state") {
    const OmaActionTable t = build_oma_actions(kQ4, 0.5, 1.7);
    // First action: 0.5 * (2^{3.4} - 1) / (-ln 0.75).
    const double expected = 0.5 * (std::exp2(3.4) - 1.0) / (-std::log(0.75));
    CHECK(t.powers[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(t.powers[0] == doctest::Approx(16.613).epsilon(1e-3));
    // Idle action: zero power, certain outage.
    CHECK(t.powers[3] == 0.0);
    CHECK(t.outage[3] == 1.0);
}

TEST_CASE("equiprobable outage ladder and monotonicity") {
    const OmaActionTable t = build_oma_actions(kQ8, 0.4, 1.2);
    for (int i = 0; i < 8; ++i) {
        CHECK(t.outage[i] == doctest::Approx((i + 1) / 8.0).epsilon(1e-12));
        CHECK(oma_success_prob(t, i) + t.outage[i] == doctest::Approx(1.0).epsilon(1e-15));
    }
    CHECK(oma_success_prob(t, 1) == doctest::Approx(0.75));
    for (int i = 0; i + 2 < 8; ++i) {
        CHECK(t.powers[i] > t.powers[i + 1]);
        CHECK(t.outage[i] <= t.outage[i + 1]);
    }
}

TEST_CASE("invalid action-set construction") {
    CHECK_THROWS_AS(build_oma_actions(kQ4, 0.0, 1.7), Error);
    CHECK_THROWS_AS(build_oma_actions(kQ4, 1.0, 1.7), Error);
    const QuantizedChannel q1 = quantize_equiprobable(FadingModel::rayleigh(), 1);
    CHECK_THROWS_AS(build_oma_actions(q1, 0.5, 1.7), Error);
}

TEST_CASE("success threshold inverts the power design") {
    const OmaActionTable t = build_oma_actions(kQ8, 0.5, 1.7);
    for (int i = 0; i + 1 < 8; ++i) {
        const double thr = oma_success_threshold(t.powers[i], 0.5, 1.7);
        CHECK(thr == doctest::Approx(kQ8.thresholds[i + 1]).epsilon(1e-12));
    }
    CHECK(std::isinf(oma_success_threshold(0.0, 0.5, 1.7)));
    CHECK(std::isinf(oma_success_threshold(-1.0, 0.5, 1.7)));
}

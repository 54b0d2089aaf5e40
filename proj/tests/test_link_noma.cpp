#include "aoi/link_noma.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace aoi;

namespace {
const QuantizedChannel kQ4 = quantize_equiprobable(FadingModel::rayleigh(), 4);
}  // namespace

TEST_CASE("back-substitution power design") {
    const NomaActionTable t = build_noma_actions(kQ4, 1.0, kOrderFirst1);
    // theta = 1; powers at the second threshold z_2 = ln 2.
    CHECK(t.theta() == doctest::Approx(1.0));
    CHECK(t.powers(1, 1) == doctest::Approx(1.0 / 0.693147).epsilon(1e-5));   // decoded last
    CHECK(t.powers(0, 1) == doctest::Approx(2.0 / 0.693147).epsilon(1e-5));   // decoded first
    CHECK(t.powers(0, 3) == 0.0);
    CHECK(t.powers(1, 3) == 0.0);
    // First-decoded power strictly exceeds the last-decoded at the same level.
    for (int k = 0; k + 1 < 4; ++k) CHECK(t.powers(0, k) > t.powers(1, k));
    // The mirrored order swaps the roles.
    const NomaActionTable t2 = build_noma_actions(kQ4, 1.0, kOrderFirst2);
    CHECK(t2.powers(0, 1) == doctest::Approx(t.powers(1, 1)));
    CHECK(t2.powers(1, 1) == doctest::Approx(t.powers(0, 1)));
}

TEST_CASE("closed-form outage components") {
    const double pa = 2.0 / 0.693147, pb = 1.0 / 0.693147;
    const OutageComponents c = noma_outage_components_closed_form(1.0, pa, pb);
    CHECK(c.eps_first ==
          doctest::Approx(1.0 - std::exp(-1.0 / pa) / (1.0 + pb / pa)).epsilon(1e-12));
    CHECK(c.eps_first == doctest::Approx(0.5286).epsilon(1e-3));
    // Idle partner: plain interference-free outage.
    const OutageComponents c_idle = noma_outage_components_closed_form(1.0, pa, 0.0);
    CHECK(c_idle.eps_first == doctest::Approx(1.0 - std::exp(-1.0 / pa)).epsilon(1e-12));
    CHECK(c_idle.eps_last_given_first_ok == 1.0);
    // Huge first power: outage vanishes.
    CHECK(noma_outage_components_closed_form(1.0, 1e12, pb).eps_first ==
          doctest::Approx(0.0).epsilon(1e-6));
    // Idle first-decoded source is flagged and dropped from the chain.
    CHECK(noma_outage_components_closed_form(1.0, 0.0, pb).first_idle);
}

TEST_CASE("marginal error chain") {
    const DecodingOrder order = kOrderFirst1;
    auto chain = [&](double ef, double elg) {
        OutageComponents c;
        c.eps_first = ef;
        c.eps_last_given_first_ok = elg;
        return noma_marginal_error(c, order);
    };
    CHECK(chain(0.0, 0.25)[1] == doctest::Approx(0.25));
    CHECK(chain(1.0, 0.25)[1] == doctest::Approx(1.0));
    CHECK(chain(0.5286, 0.5)[1] == doctest::Approx(0.5286 + 0.4714 * 0.5).epsilon(1e-4));
    CHECK(chain(0.5286, 0.5)[0] == doctest::Approx(0.5286));
}

TEST_CASE("joint outcome distributions") {
    const NomaActionTable t = build_noma_actions(kQ4, 1.0, kOrderFirst1);
    for (const CouplingMode mode :
         {CouplingMode::SicStrict, CouplingMode::IndependentFactored}) {
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                JointOutcomeDist d = noma_joint_outcomes(t, i, j, mode);
                CHECK(d.sum() == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(d.p_ss >= 0.0);
                CHECK(d.p_sf >= 0.0);
                CHECK(d.p_fs >= 0.0);
                CHECK(d.p_ff >= 0.0);
            }
    }
    // Strict SIC: the later source cannot succeed past an active failed first.
    const JointOutcomeDist strict = noma_joint_outcomes(t, 1, 1, CouplingMode::SicStrict);
    CHECK(strict.p_fs == 0.0);
    // Marginals in both modes follow the error chain.
    const OutageComponents c = noma_outage_components(t, 1, 1);
    const std::array<double, 2> eps = noma_marginal_error(c, t.order);
    for (const CouplingMode mode :
         {CouplingMode::SicStrict, CouplingMode::IndependentFactored}) {
        const JointOutcomeDist d = noma_joint_outcomes(t, 1, 1, mode);
        CHECK(d.p_fs + d.p_ff == doctest::Approx(eps[0]).epsilon(1e-12));
        CHECK(d.p_sf + d.p_ff == doctest::Approx(eps[1]).epsilon(1e-12));
    }
    // Factored mode multiplies the marginals, e.g. FF = eps_1 * eps_2.
    const JointOutcomeDist f = noma_joint_outcomes(t, 1, 1, CouplingMode::IndependentFactored);
    CHECK(f.p_ff == doctest::Approx(eps[0] * eps[1]).epsilon(1e-12));
    CHECK(f.p_fs == doctest::Approx(eps[0] * (1.0 - eps[1])).epsilon(1e-12));
}

TEST_CASE("idle first-decoded source leaves the partner interference-free") {
    const NomaActionTable t = build_noma_actions(kQ4, 1.0, kOrderFirst1);
    const int idle = 3;
    const JointOutcomeDist d = noma_joint_outcomes(t, idle, 1, CouplingMode::SicStrict);
    const double pb = t.powers(1, 1);
    CHECK(d.p_ss == 0.0);
    CHECK(d.p_sf == 0.0);
    CHECK(d.p_fs == doctest::Approx(std::exp(-1.0 / pb)).epsilon(1e-12));
}

TEST_CASE("eps_first monotone: decreasing in own power, increasing in interference") {
    double prev = 1.0;
    for (double pa : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        const double e = noma_outage_components_closed_form(1.0, pa, 1.0).eps_first;
        CHECK(e <= prev);
        prev = e;
    }
    prev = 0.0;
    for (double pb : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        const double e = noma_outage_components_closed_form(1.0, 2.0, pb).eps_first;
        CHECK(e >= prev);
        prev = e;
    }
}

TEST_CASE("Monte Carlo agreement for the Rayleigh closed forms") {
    std::mt19937_64 rng(11);
    const FadingModel ray = FadingModel::rayleigh();
    const double theta = std::exp2(1.7) - 1.0;
    for (const auto& [pa, pb] : {std::pair{6.0, 2.5}, {3.0, 3.0}, {10.0, 1.0}}) {
        const OutageComponents cf = noma_outage_components_closed_form(theta, pa, pb);
        const OutageComponents mc =
            noma_outage_components_mc(ray, theta, pa, pb, rng, 200000);
        CHECK(std::abs(cf.eps_first - mc.eps_first) < 0.006);
        CHECK(std::abs(cf.eps_last_given_first_ok - mc.eps_last_given_first_ok) < 0.01);
    }
}

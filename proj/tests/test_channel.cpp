#include "aoi/channel.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace aoi;

TEST_CASE("equiprobable quantization of the unit-mean Rayleigh gain") {
    const FadingModel ray = FadingModel::rayleigh();
    const QuantizedChannel q = quantize_equiprobable(ray, 4);
    REQUIRE(q.K == 4);
    CHECK(q.thresholds[0] == 0.0);
    CHECK(q.thresholds[1] == doctest::Approx(0.287682).epsilon(1e-5));
    CHECK(q.thresholds[2] == doctest::Approx(0.693147).epsilon(1e-5));
    CHECK(q.thresholds[3] == doctest::Approx(1.386294).epsilon(1e-5));
    CHECK(std::isinf(q.thresholds[4]));
    for (int i = 0; i < 4; ++i) CHECK(q.probs[i] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("degenerate single-state quantization") {
    const QuantizedChannel q = quantize_equiprobable(FadingModel::rayleigh(), 1);
    REQUIRE(q.K == 1);
    CHECK(q.thresholds[0] == 0.0);
    CHECK(std::isinf(q.thresholds[1]));
    CHECK(q.probs[0] == doctest::Approx(1.0));
}

TEST_CASE("large-K quantization: probabilities sum to 1, thresholds increase") {
    const QuantizedChannel q = quantize_equiprobable(FadingModel::rayleigh(), 128);
    CHECK(q.probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < 128; ++i) CHECK(q.thresholds[i] < q.thresholds[i + 1]);
    // Probabilities reconstructed from the CDF over each interval.
    const FadingModel ray = FadingModel::rayleigh();
    for (int i = 0; i < 127; ++i) {
        const double mass = ray.cdf(q.thresholds[i + 1]) - ray.cdf(q.thresholds[i]);
        CHECK(std::abs(mass - q.probs[i]) < 1e-10);
    }
}

TEST_CASE("state lookup: lower edge inclusive, domain total") {
    const QuantizedChannel q4 = quantize_equiprobable(FadingModel::rayleigh(), 4);
    CHECK(state_of(q4, 0.5) == 1);
    CHECK(state_of(q4, 0.0) == 0);
    CHECK(state_of(q4, 1e6) == 3);
    const QuantizedChannel q8 = quantize_equiprobable(FadingModel::rayleigh(), 8);
    for (int i = 0; i < 8; ++i) CHECK(state_of(q8, q8.thresholds[i]) == i);
}

TEST_CASE("gain sampling: deterministic, unit mean, matches state probabilities") {
    const FadingModel ray = FadingModel::rayleigh();
    std::mt19937_64 a(7), b(7);
    CHECK(sample_gain(ray, a) == sample_gain(ray, b));

    std::mt19937_64 rng(7);
    const int n = 1000000;
    const QuantizedChannel q = quantize_equiprobable(ray, 8);
    double sum = 0.0;
    Eigen::VectorXd freq = Eigen::VectorXd::Zero(8);
    for (int i = 0; i < n; ++i) {
        const double g = sample_gain(ray, rng);
        sum += g;
        freq[state_of(q, g)] += 1.0;
    }
    CHECK(std::abs(sum / n - 1.0) < 0.01);
    CHECK((freq / n - q.probs).lpNorm<1>() < 0.01);
}

TEST_CASE("tabulated models: interpolation and quantization support") {
    // Gains uniform on [1, 2]: cdf(1.5) = 0.5.
    const FadingModel uni = FadingModel::tabulated({{0.0, 1.0}, {1.0, 2.0}});
    CHECK(uni.inverse_cdf(0.5) == doctest::Approx(1.5));
    CHECK(uni.cdf(1.5) == doctest::Approx(0.5));
    CHECK(uni.cdf(0.5) == doctest::Approx(0.0));
    const QuantizedChannel q = quantize_equiprobable(uni, 2);
    CHECK(q.thresholds[1] == doctest::Approx(1.5));
    // Too few tabulated points for the requested resolution.
    CHECK_THROWS_AS(quantize_equiprobable(uni, 9), Error);
}

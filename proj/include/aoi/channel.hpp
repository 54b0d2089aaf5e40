#pragma once

#include <Eigen/Dense>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace aoi {

/// Generic error type for invalid configuration or unsupported requests.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class FadingKind { RayleighUnitMean, CustomTabulated };

/// Block-fading law for the dimensionless channel power gain.
///
/// Rayleigh with unit mean gain is the exponential(1) law. Custom models are
/// tabulated as (quantile, gain) pairs and interpolated linearly, which lets
/// tests inject synthetic channels with known answers.
class FadingModel {
  public:
    static FadingModel rayleigh();
    static FadingModel tabulated(std::vector<std::pair<double, double>> quantile_gain);

    FadingKind kind() const { return kind_; }
    std::size_t table_size() const { return table_.size(); }

    /// P{gain <= z}. Nondecreasing with cdf(0) = 0.
    double cdf(double z) const;
    /// Quantile function on [0, 1); inverse_cdf(0) = 0.
    double inverse_cdf(double u) const;

  private:
    FadingModel() = default;
    FadingKind kind_ = FadingKind::RayleighUnitMean;
    std::vector<std::pair<double, double>> table_;  // (u, gain), sorted by u
};

/// K-level quantization of a fading law. thresholds has K+1 entries with
/// thresholds[0] = 0 and thresholds[K] = +inf (a true infinity sentinel, so
/// success conditions "z >= z_i" are exact). State i covers [z_i, z_{i+1}).
struct QuantizedChannel {
    int K = 0;
    Eigen::VectorXd thresholds;  // size K+1
    Eigen::VectorXd probs;       // size K, sums to 1
};

/// Equiprobable quantization: z_i = CDF^-1(i/K), psi_i = 1/K.
QuantizedChannel quantize_equiprobable(const FadingModel& model, int K);

/// Index i with z_i <= gain < z_{i+1}. Total on gain >= 0.
int state_of(const QuantizedChannel& q, double gain);

/// One i.i.d. draw from the fading law via inverse-CDF sampling; identical
/// seeds give identical sequences.
double sample_gain(const FadingModel& model, std::mt19937_64& rng);

}  // namespace aoi

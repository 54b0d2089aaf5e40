#include "aoi/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aoi {

FadingModel FadingModel::rayleigh() {
    FadingModel m;
    m.kind_ = FadingKind::RayleighUnitMean;
    return m;
}

FadingModel FadingModel::tabulated(std::vector<std::pair<double, double>> quantile_gain) {
    if (quantile_gain.size() < 2)
        throw Error("tabulated fading model needs at least 2 quantile points");
    std::sort(quantile_gain.begin(), quantile_gain.end());
    if (quantile_gain.front().first < 0.0 || quantile_gain.back().first > 1.0)
        throw Error("tabulated quantiles must lie in [0,1]");
    for (std::size_t i = 1; i < quantile_gain.size(); ++i) {
        if (quantile_gain[i].second < quantile_gain[i - 1].second)
            throw Error("tabulated gains must be nondecreasing in the quantile");
    }
    FadingModel m;
    m.kind_ = FadingKind::CustomTabulated;
    m.table_ = std::move(quantile_gain);
    return m;
}

double FadingModel::cdf(double z) const {
    if (z <= 0.0) return 0.0;
    if (kind_ == FadingKind::RayleighUnitMean) return -std::expm1(-z);
    if (z <= table_.front().second) return table_.front().first;
    if (z >= table_.back().second) return table_.back().first;
    for (std::size_t i = 1; i < table_.size(); ++i) {
        if (z <= table_[i].second) {
            const auto& [u0, z0] = table_[i - 1];
            const auto& [u1, z1] = table_[i];
            if (z1 == z0) return u1;
            return u0 + (u1 - u0) * (z - z0) / (z1 - z0);
        }
    }
    return table_.back().first;
}

double FadingModel::inverse_cdf(double u) const {
    if (u < 0.0 || u >= 1.0) {
        if (u == 1.0) return std::numeric_limits<double>::infinity();
        throw Error("quantile argument outside [0,1]");
    }
    if (kind_ == FadingKind::RayleighUnitMean) return -std::log1p(-u);
    if (u <= table_.front().first) return table_.front().second;
    if (u >= table_.back().first) return table_.back().second;
    for (std::size_t i = 1; i < table_.size(); ++i) {
        if (u <= table_[i].first) {
            const auto& [u0, z0] = table_[i - 1];
            const auto& [u1, z1] = table_[i];
            if (u1 == u0) return z1;
            return z0 + (z1 - z0) * (u - u0) / (u1 - u0);
        }
    }
    return table_.back().second;
}

QuantizedChannel quantize_equiprobable(const FadingModel& model, int K) {
    if (K < 1) throw Error("quantization level K must be >= 1");
    if (model.kind() == FadingKind::CustomTabulated &&
        model.table_size() < static_cast<std::size_t>(K))
        throw Error("quantization unsupported: tabulated model has fewer than K quantile points");

    QuantizedChannel q;
    q.K = K;
    q.thresholds.resize(K + 1);
    q.probs.resize(K);
    for (int i = 0; i < K; ++i) {
        q.thresholds[i] = model.inverse_cdf(static_cast<double>(i) / K);
        q.probs[i] = 1.0 / K;
    }
    q.thresholds[0] = 0.0;
    q.thresholds[K] = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= K; ++i) {
        if (!(q.thresholds[i] > q.thresholds[i - 1]))
            throw Error("quantization unsupported: thresholds not strictly increasing");
    }
    return q;
}

int state_of(const QuantizedChannel& q, double gain) {
    // Intervals are closed-below/open-above, so z_i itself belongs to state i.
    const double* begin = q.thresholds.data() + 1;
    const double* end = q.thresholds.data() + q.K + 1;
    return static_cast<int>(std::upper_bound(begin, end, gain) - begin);
}

double sample_gain(const FadingModel& model, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    return model.inverse_cdf(u01(rng));
}

}  // namespace aoi

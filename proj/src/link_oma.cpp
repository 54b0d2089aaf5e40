#include "aoi/link_oma.hpp"

#include <cmath>
#include <limits>

namespace aoi {

OmaActionTable build_oma_actions(const QuantizedChannel& q, double rho, double rate) {
    if (!(rho > 0.0 && rho < 1.0)) throw Error("invalid slot fraction: rho must lie in (0,1)");
    if (!(rate > 0.0)) throw Error("target rate must be positive");
    if (q.K < 2) throw Error("unsupported action set: K >= 2 required (z_1 = 0 otherwise)");

    const int K = q.K;
    const double snr_gap = std::exp2(rate / rho) - 1.0;

    OmaActionTable t;
    t.rho = rho;
    t.rate = rate;
    t.powers.setZero(K);
    t.outage.setZero(K);

    double cum = 0.0;
    for (int i = 0; i < K - 1; ++i) {
        t.powers[i] = rho * snr_gap / q.thresholds[i + 1];
        cum += q.probs[i];
        t.outage[i] = cum;  // P{gain < z_{i+1}}
    }
    t.powers[K - 1] = 0.0;  // idle
    t.outage[K - 1] = 1.0;
    return t;
}

double oma_success_prob(const OmaActionTable& table, int i) {
    if (i < 0 || i >= table.K()) throw Error("OMA action index out of range");
    return 1.0 - table.outage[i];
}

double oma_success_threshold(double power, double rho, double rate) {
    if (power <= 0.0) return std::numeric_limits<double>::infinity();
    return rho * (std::exp2(rate / rho) - 1.0) / power;
}

}  // namespace aoi

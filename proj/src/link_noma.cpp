#include "aoi/link_noma.hpp"

#include <cmath>

namespace aoi {

NomaActionTable build_noma_actions(const QuantizedChannel& q, double rate, DecodingOrder order) {
    if (q.K < 2) throw Error("unsupported action set: K >= 2 required");
    if (!(rate > 0.0)) throw Error("target rate must be positive");
    if (!((order[0] == 0 && order[1] == 1) || (order[0] == 1 && order[1] == 0)))
        throw Error("decoding order must be a permutation of the two sources");

    const int K = q.K;
    const double theta = std::exp2(rate) - 1.0;

    NomaActionTable t;
    t.order = order;
    t.rate = rate;
    t.powers.setZero(2, K);
    for (int k = 0; k < K - 1; ++k) {
        const double z = q.thresholds[k + 1];
        t.powers(order[1], k) = theta / z;                  // last decoded, no interference
        t.powers(order[0], k) = theta * (1.0 + theta) / z;  // nominal interference cancelled out
    }
    return t;
}

OutageComponents noma_outage_components_closed_form(double theta, double p_first, double p_last) {
    OutageComponents c;
    if (p_first <= 0.0) {
        // Idle first-decoded source: dropped from the SIC chain, the partner
        // decodes interference-free.
        c.first_idle = true;
        c.eps_first = 1.0;
        c.eps_last_given_first_ok = p_last > 0.0 ? -std::expm1(-theta / p_last) : 1.0;
        return c;
    }
    const double interference = p_last > 0.0 ? theta * p_last / p_first : 0.0;
    c.eps_first = 1.0 - std::exp(-theta / p_first) / (1.0 + interference);
    // Success of the first decode is the event z_a >= theta(1 + P_b z_b)/P_a,
    // which tilts the interferer's gain; the exact conditional outage of the
    // last link under Rayleigh is 1 - exp(-theta/P_b - theta^2/P_a).
    c.eps_last_given_first_ok =
        p_last > 0.0 ? -std::expm1(-theta / p_last - theta * theta / p_first) : 1.0;
    return c;
}

OutageComponents noma_outage_components_mc(const FadingModel& model, double theta, double p_first,
                                           double p_last, std::mt19937_64& rng, int samples) {
    long n_first_fail = 0, n_first_ok = 0, n_last_fail_given_ok = 0, n_last_fail = 0;
    for (int s = 0; s < samples; ++s) {
        const double za = sample_gain(model, rng);
        const double zb = sample_gain(model, rng);
        const bool first_ok =
            p_first > 0.0 && za * p_first >= theta * (1.0 + p_last * zb);
        const bool last_link_ok = p_last > 0.0 && zb * p_last >= theta;
        if (first_ok) {
            ++n_first_ok;
            if (!last_link_ok) ++n_last_fail_given_ok;
        } else {
            ++n_first_fail;
        }
        if (!last_link_ok) ++n_last_fail;
    }
    OutageComponents c;
    c.first_idle = p_first <= 0.0;
    c.eps_first = static_cast<double>(n_first_fail) / samples;
    if (c.first_idle) {
        c.eps_last_given_first_ok = static_cast<double>(n_last_fail) / samples;
    } else {
        c.eps_last_given_first_ok =
            n_first_ok > 0 ? static_cast<double>(n_last_fail_given_ok) / n_first_ok : 1.0;
    }
    return c;
}

OutageComponents noma_outage_components(const NomaActionTable& table, int i, int j) {
    if (i < 0 || i >= table.K() || j < 0 || j >= table.K())
        throw Error("NOMA action index out of range");
    return noma_outage_components_closed_form(table.theta(), table.powers(table.order[0], i),
                                              table.powers(table.order[1], j));
}

std::array<double, 2> noma_marginal_error(const OutageComponents& c, const DecodingOrder& order) {
    std::array<double, 2> eps{};
    eps[order[0]] = c.eps_first;
    if (c.first_idle) {
        eps[order[1]] = c.eps_last_given_first_ok;  // interference-free, chain skipped
    } else {
        eps[order[1]] = c.eps_first + (1.0 - c.eps_first) * c.eps_last_given_first_ok;
    }
    return eps;
}

JointOutcomeDist noma_joint_outcomes_powers(double theta, DecodingOrder order, double p_first,
                                            double p_last, CouplingMode mode) {
    const OutageComponents c = noma_outage_components_closed_form(theta, p_first, p_last);
    JointOutcomeDist d;
    d.p_ss = d.p_sf = d.p_fs = d.p_ff = 0.0;
    if (mode == CouplingMode::IndependentFactored) {
        const auto eps = noma_marginal_error(c, order);
        d.p_ss = (1.0 - eps[0]) * (1.0 - eps[1]);
        d.p_sf = (1.0 - eps[0]) * eps[1];
        d.p_fs = eps[0] * (1.0 - eps[1]);
        d.p_ff = eps[0] * eps[1];
        return d;
    }
    if (mode != CouplingMode::SicStrict) throw Error("invalid coupling mode");
    const bool first_is_1 = order[0] == 0;
    if (c.first_idle) {
        const double last_ok = 1.0 - c.eps_last_given_first_ok;
        d.at(!first_is_1, first_is_1) = last_ok;  // first fails, last succeeds
        d.at(false, false) = 1.0 - last_ok;
        return d;
    }
    const double first_ok = 1.0 - c.eps_first;
    d.at(true, true) = first_ok * (1.0 - c.eps_last_given_first_ok);
    d.at(first_is_1, !first_is_1) = first_ok * c.eps_last_given_first_ok;
    d.at(false, false) = c.eps_first;
    return d;
}

JointOutcomeDist noma_joint_outcomes(const NomaActionTable& table, int i, int j,
                                     CouplingMode mode) {
    if (i < 0 || i >= table.K() || j < 0 || j >= table.K())
        throw Error("NOMA action index out of range");
    return noma_joint_outcomes_powers(table.theta(), table.order,
                                      table.powers(table.order[0], i),
                                      table.powers(table.order[1], j), mode);
}

}  // namespace aoi

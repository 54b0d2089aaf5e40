#pragma once

#include "aoi/channel.hpp"

namespace aoi {

/// Per-source OMA action table. Action i (0-based, i = 0..K-1) targets
/// channel state i+1's lower edge; the last action (index K-1) is idle with
/// zero power and certain outage.
struct OmaActionTable {
    double rho = 0.5;   // slot fraction in (0,1)
    double rate = 1.7;  // target packet size in bits
    Eigen::VectorXd powers;  // size K; strictly decreasing on 0..K-2, powers[K-1] = 0
    Eigen::VectorXd outage;  // size K; eps_i = P{gain < z_{i+1}}, outage[K-1] = 1

    int K() const { return static_cast<int>(powers.size()); }
};

/// Powers are designed against the lower edge of the target state, so action
/// i succeeds exactly on the event {gain >= z_{i+1}}.
OmaActionTable build_oma_actions(const QuantizedChannel& q, double rho, double rate);

/// 1 - eps_i for 0-based action index i.
double oma_success_prob(const OmaActionTable& table, int i);

/// Gain threshold for success at an arbitrary transmit power (used when the
/// simulator is driven by powers outside the designed table, e.g. learned
/// normalized actions). Infinite for power <= 0.
double oma_success_threshold(double power, double rho, double rate);

}  // namespace aoi

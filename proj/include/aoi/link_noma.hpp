#pragma once

#include "aoi/channel.hpp"

#include <array>

namespace aoi {

/// SIC decoding order for the two-source case: order[0] is decoded first
/// (sees the other source as interference), order[1] last. Source indices
/// are 0-based.
using DecodingOrder = std::array<int, 2>;

inline constexpr DecodingOrder kOrderFirst1{0, 1};   // D_1: source 1 decoded first
inline constexpr DecodingOrder kOrderFirst2{1, 0};   // D_2: source 2 decoded first

enum class CouplingMode { SicStrict, IndependentFactored };

/// Per-order NOMA power table. Entry (n, k) is the power of source n when
/// targeting channel state k+1 under this order; column K-1 is idle (0).
struct NomaActionTable {
    DecodingOrder order{0, 1};
    double rate = 1.7;       // target packet size in bits, shared by both sources
    Eigen::MatrixXd powers;  // 2 x K

    int K() const { return static_cast<int>(powers.cols()); }
    double theta() const { return std::exp2(rate) - 1.0; }
};

/// Back-substitution design at matched nominal states: the last-decoded
/// position gets theta/z_k, the first-decoded theta*(1+theta)/z_k, so the
/// design reduces to the interference-free threshold when the partner idles.
NomaActionTable build_noma_actions(const QuantizedChannel& q, double rate, DecodingOrder order);

struct OutageComponents {
    double eps_first = 1.0;               // outage of the first-decoded link
    double eps_last_given_first_ok = 1.0; // conditional outage of the last link
    bool first_idle = false;              // first-decoded source transmits nothing
};

/// Closed-form components under Rayleigh unit-mean fading for arbitrary
/// powers P_a (first decoded) and P_b (last decoded).
OutageComponents noma_outage_components_closed_form(double theta, double p_first, double p_last);

/// Same quantities by seeded Monte Carlo over the given fading law; the
/// declared oracle for non-Rayleigh models.
OutageComponents noma_outage_components_mc(const FadingModel& model, double theta, double p_first,
                                           double p_last, std::mt19937_64& rng, int samples);

/// Components for table actions i (first-decoded source) and j (last-decoded),
/// 0-based.
OutageComponents noma_outage_components(const NomaActionTable& table, int i, int j);

/// Marginal error probabilities mapped back to source indices via the order.
/// The last-decoded marginal follows the SIC chain; an idle first-decoded
/// source is dropped from the chain.
std::array<double, 2> noma_marginal_error(const OutageComponents& c, const DecodingOrder& order);

/// Joint decode-outcome distribution over {SS, SF, FS, FF}; the first letter
/// is source 1's success flag, the second source 2's.
struct JointOutcomeDist {
    double p_ss = 0, p_sf = 0, p_fs = 0, p_ff = 1;

    double& at(bool ok1, bool ok2) {
        return ok1 ? (ok2 ? p_ss : p_sf) : (ok2 ? p_fs : p_ff);
    }
    double sum() const { return p_ss + p_sf + p_fs + p_ff; }
};

JointOutcomeDist noma_joint_outcomes(const NomaActionTable& table, int i, int j,
                                     CouplingMode mode);

/// Joint outcome distribution from explicit powers (e.g. learned actions).
JointOutcomeDist noma_joint_outcomes_powers(double theta, DecodingOrder order, double p_first,
                                            double p_last, CouplingMode mode);

}  // namespace aoi

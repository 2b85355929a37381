#include "lrst/lrst_inference.hpp"

#include <cmath>
#include <string>

#include "lrst/errors.hpp"
#include "lrst/numeric.hpp"

namespace lrst {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error(ErrorCode::invalid_argument, "alpha must lie in (0, 1), got " + std::to_string(alpha));
}

}  // namespace

LrstResult lrst_test(const RankSummary& ranks, const VarianceComponents& vc, std::size_t n_x,
                     std::size_t n_y, double alpha) {
    check_alpha(alpha);
    const double q = vc.quad_form();
    if (!(q > min_quad_form))
        throw Error(ErrorCode::degenerate_variance,
                    "J' Sigma J = " + std::to_string(q) + " is not positive; the test statistic is undefined");
    const auto T = static_cast<double>(ranks.visits());
    const auto N = static_cast<double>(n_x + n_y);

    LrstResult r;
    r.alpha = alpha;
    r.n_x = n_x;
    r.n_y = n_y;
    r.visits = ranks.visits();
    r.outcomes = ranks.outcomes();
    r.theta_bar_hat = ranks.theta_bar_hat;
    r.quad_form = q;
    r.rank_diff = ranks.rank_diff.mean();
    r.se = std::sqrt(N * q) / T;
    r.z = r.rank_diff / r.se;
    r.p_value = numeric::normal_sf(r.z);
    r.reject = r.z > numeric::upper_critical(alpha);
    return r;
}

LrstResult lrst_test(const TrialData& data, double alpha) {
    check_alpha(alpha);
    return lrst_test(rank_summary(data), variance_components(data), data.n_x(), data.n_y(), alpha);
}

}  // namespace lrst

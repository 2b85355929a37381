#include "lrst/power_design.hpp"

#include <cmath>
#include <string>

#include "lrst/errors.hpp"
#include "lrst/lrst_inference.hpp"
#include "lrst/numeric.hpp"

namespace lrst {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error(ErrorCode::invalid_argument, "alpha must lie in (0, 1), got " + std::to_string(alpha));
}

void check_design(const Matrix& C, const Matrix& D, double lambda, std::size_t visits) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw Error(ErrorCode::invalid_argument, "lambda must be positive, got " + std::to_string(lambda));
    const auto T = static_cast<Eigen::Index>(visits);
    if (visits == 0 || C.rows() != T || C.cols() != T || D.rows() != T || D.cols() != T)
        throw Error(ErrorCode::invalid_argument, "C and D must be T x T with T = " + std::to_string(visits));
}

double design_quad_form(const Matrix& C, const Matrix& D, double lambda) {
    const double q = C.sum() + lambda * D.sum();
    if (!(q > 0.0))
        throw Error(ErrorCode::non_positive_variance,
                    "J'(C + lambda D)J = " + std::to_string(q) + " must be positive");
    return q;
}

double eq3_power(double theta_bar, double q, double lambda, double N, double T, double z) {
    const double nc = theta_bar / std::sqrt(4.0 * (1.0 + lambda) * q / (N * lambda * T * T));
    return numeric::normal_cdf(nc - z);
}

}  // namespace

PowerResult theoretical_power(double theta_bar, const Matrix& C, const Matrix& D, double lambda, double N,
                              std::size_t visits, double alpha) {
    check_alpha(alpha);
    check_design(C, D, lambda, visits);
    if (!(N > 0.0)) throw Error(ErrorCode::invalid_argument, "N must be positive");
    const double q = design_quad_form(C, D, lambda);
    const double T = static_cast<double>(visits);
    PowerResult r;
    r.theta_bar = theta_bar;
    r.quad_form = q;
    r.N = N;
    r.lambda = lambda;
    r.visits = visits;
    r.alpha = alpha;
    r.noncentrality = theta_bar / std::sqrt(4.0 * (1.0 + lambda) * q / (N * lambda * T * T));
    r.power = numeric::normal_cdf(r.noncentrality - numeric::upper_critical(alpha));
    return r;
}

SampleSizeResult required_sample_size(double theta_bar, const Matrix& C, const Matrix& D, double lambda,
                                      std::size_t visits, double alpha, double pi) {
    check_alpha(alpha);
    check_design(C, D, lambda, visits);
    if (!(pi > alpha && pi < 1.0))
        throw Error(ErrorCode::invalid_argument, "target power must lie in (alpha, 1), got " + std::to_string(pi));
    if (!(theta_bar > 0.0))
        throw Error(ErrorCode::non_positive_effect,
                    "theta_bar = " + std::to_string(theta_bar) + " must be positive for a sample size");
    const double q = design_quad_form(C, D, lambda);
    const double T = static_cast<double>(visits);
    const double z = numeric::upper_critical(alpha);
    const double ratio = (numeric::normal_quantile(pi) + z) / theta_bar;

    SampleSizeResult r;
    r.target_power = pi;
    r.lambda = lambda;
    r.alpha = alpha;
    r.theta_bar = theta_bar;
    r.quad_form = q;
    r.n_raw = 4.0 * (1.0 + lambda) / (lambda * T * T) * ratio * ratio * q;

    auto n_y = static_cast<std::size_t>(std::ceil(r.n_raw / (1.0 + lambda)));
    if (n_y == 0) n_y = 1;
    for (;;) {
        auto n_x = static_cast<std::size_t>(std::ceil(lambda * static_cast<double>(n_y)));
        if (n_x == 0) n_x = 1;
        const double realized = static_cast<double>(n_x) / static_cast<double>(n_y);
        const double N = static_cast<double>(n_x + n_y);
        const double p = eq3_power(theta_bar, C.sum() + realized * D.sum(), realized, N, T, z);
        if (p >= pi) {
            r.n_x = n_x;
            r.n_y = n_y;
            r.n = n_x + n_y;
            r.achieved_power = p;
            return r;
        }
        ++n_y;
    }
}

double power_variance_bracket(const MomentEstimates& me) {
    const auto K = me.H.cols();
    const auto P = me.G.rows();
    double s = 0.0;
    for (Eigen::Index p = 0; p < P; ++p)
        for (Eigen::Index q = 0; q < P; ++q) s += (p == q) ? me.H(p / K, p % K) : me.G(p, q);
    const double k2 = static_cast<double>(K * K);
    return s / (k2 * k2);
}

PowerResult estimated_power(double theta_bar, double quad_form, double N, std::size_t visits, double alpha,
                            std::optional<double> var_inf) {
    check_alpha(alpha);
    if (!(quad_form > min_quad_form))
        throw Error(ErrorCode::degenerate_variance,
                    "J' Sigma J = " + std::to_string(quad_form) + " is not positive");
    if (!(N > 0.0)) throw Error(ErrorCode::invalid_argument, "N must be positive");
    const double T = static_cast<double>(visits);
    const double z = numeric::upper_critical(alpha);
    PowerResult r;
    r.theta_bar = theta_bar;
    r.quad_form = quad_form;
    r.N = N;
    r.visits = visits;
    r.alpha = alpha;
    r.noncentrality = theta_bar / std::sqrt(4.0 * quad_form / (N * T * T));
    r.power = numeric::normal_cdf(r.noncentrality - z);
    if (var_inf) {
        const double phi = numeric::normal_pdf(r.noncentrality - z);
        const double y = quad_form;
        const double v = phi * phi * theta_bar * theta_bar * T * T / (16.0 * y * y * y) * *var_inf;
        r.var_inf = *var_inf;
        r.variance = std::max(0.0, v);
        r.se = std::sqrt(*r.variance);
    }
    return r;
}

PowerResult estimated_power(const RankSummary& ranks, const PlacementTables& pt, const VarianceComponents& vc,
                            double alpha, std::optional<double> at_n) {
    const auto nx = pt.u.subjects(), ny = pt.v.subjects();
    const double N = at_n ? *at_n : static_cast<double>(nx + ny);
    const double var_inf = power_variance_bracket(moment_estimates(pt, vc));
    auto r = estimated_power(ranks.theta_bar_hat, vc.quad_form(), N, ranks.visits(), alpha, var_inf);
    r.lambda = vc.lambda;
    return r;
}

PowerResult estimated_power(const TrialData& data, double alpha, std::optional<double> at_n) {
    check_alpha(alpha);
    const auto pt = placements(data);
    return estimated_power(rank_summary(data), pt, variance_components(pt), alpha, at_n);
}

}  // namespace lrst

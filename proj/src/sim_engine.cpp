#include "lrst/sim_engine.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "lrst/errors.hpp"
#include "lrst/lrst_inference.hpp"
#include "lrst/parallel.hpp"
#include "lrst/power_design.hpp"
#include "lrst/rank_engine.hpp"
#include "lrst/rng.hpp"
#include "lrst/variance_components.hpp"

namespace lrst {

namespace {

void fill_arm(Array3& out, const Matrix& mu, const Matrix& sd, const Matrix& L, NormalSampler& rng) {
    const auto T = mu.rows(), K = mu.cols(), P = T * K;
    Vector z(P), e(P);
    for (std::size_t i = 0; i < out.subjects(); ++i) {
        for (Eigen::Index p = 0; p < P; ++p) z(p) = rng();
        e.noalias() = L * z;
        for (Eigen::Index t = 0; t < T; ++t)
            for (Eigen::Index k = 0; k < K; ++k)
                out(i, static_cast<std::size_t>(t), static_cast<std::size_t>(k)) =
                    mu(t, k) + sd(t, k) * e(t * K + k);
    }
}

TrialData generate_with(const GaussianScenario& s, const Matrix& L, std::size_t n_x, std::size_t n_y,
                        std::uint64_t seed, bool prune) {
    const std::size_t T = s.visits(), K = s.outcomes();
    Array3 x(n_x, T, K), y(n_y, T, K);
    NormalSampler rng(seed);
    fill_arm(x, s.mu_control, s.sd_control, L, rng);
    fill_arm(y, s.mu_treatment, s.sd_treatment, L, rng);
    auto data = make_trial_data(std::move(x), std::move(y));
    if (!prune) return data;
    return validate_and_prune(data).first;
}

void check_config(const SimConfig& cfg) {
    if (cfg.n_x < 2 || cfg.n_y < 2) throw Error(ErrorCode::invalid_argument, "each arm needs at least 2 subjects");
    if (cfg.replicates < 1) throw Error(ErrorCode::invalid_argument, "replicates must be at least 1");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw Error(ErrorCode::invalid_argument, "alpha must lie in (0, 1)");
    cfg.scenario.validate();
}

struct MeanSd {
    double sum = 0.0, sumsq = 0.0;
    std::size_t n = 0;
    void add(double v) {
        sum += v;
        sumsq += v * v;
        ++n;
    }
    double mean() const { return sum / static_cast<double>(n); }
    double sd() const {
        if (n < 2) return 0.0;
        const double m = mean();
        return std::sqrt(std::max(0.0, (sumsq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1)));
    }
};

SimReport report_header(const SimConfig& cfg) {
    SimReport r;
    r.replicate_count = cfg.replicates;
    r.seed = cfg.seed;
    r.n_x = cfg.n_x;
    r.n_y = cfg.n_y;
    r.alpha = cfg.alpha;
    return r;
}

}  // namespace

TrialData generate_trial(const GaussianScenario& s, std::size_t n_x, std::size_t n_y, std::uint64_t seed,
                         bool prune) {
    s.validate();
    return generate_with(s, correlation_factor(s.within_subject_corr()), n_x, n_y, seed, prune);
}

std::pair<std::size_t, std::size_t> split_sample(std::size_t N, double lambda) {
    if (!(lambda > 0.0)) throw Error(ErrorCode::invalid_argument, "lambda must be positive");
    const auto n_x = static_cast<std::size_t>(std::llround(static_cast<double>(N) * lambda / (1.0 + lambda)));
    if (n_x < 2 || N < n_x + 2)
        throw Error(ErrorCode::invalid_argument, "N = " + std::to_string(N) + " is too small for lambda");
    return {n_x, N - n_x};
}

SimReport empirical_power(const SimConfig& cfg) {
    check_config(cfg);
    const Matrix L = correlation_factor(cfg.scenario.within_subject_corr());
    struct Rep {
        bool reject = false;
        double z = 0.0, power = 0.0, variance = 0.0, se = 0.0, theta_bar = 0.0;
        std::size_t visits = 0, outcomes = 0;
    };
    std::vector<Rep> reps(cfg.replicates);
    parallel_for(cfg.replicates, [&](std::size_t r) {
        const auto data = generate_with(cfg.scenario, L, cfg.n_x, cfg.n_y, derive_seed(cfg.seed, r), true);
        const auto ranks = rank_summary(data);
        const auto pt = placements(data);
        const auto vc = variance_components(pt);
        const auto test = lrst_test(ranks, vc, data.n_x(), data.n_y(), cfg.alpha);
        const auto pw = estimated_power(ranks, pt, vc, cfg.alpha);
        reps[r] = {test.reject, test.z, pw.power, pw.variance.value_or(0.0), pw.se.value_or(0.0),
                   ranks.theta_bar_hat, data.visits(), data.outcomes()};
    });

    SimReport out = report_header(cfg);
    out.visits = reps.front().visits;
    out.outcomes = reps.front().outcomes;
    PowerSummary ps;
    MeanSd pw, z, th, var, se;
    for (const auto& r : reps) {
        ps.rejections += r.reject ? 1 : 0;
        pw.add(r.power);
        z.add(r.z);
        th.add(r.theta_bar);
        var.add(r.variance);
        se.add(r.se);
    }
    const double n = static_cast<double>(cfg.replicates);
    ps.empirical_power = static_cast<double>(ps.rejections) / n;
    ps.empirical_power_se = std::sqrt(ps.empirical_power * (1.0 - ps.empirical_power) / n);
    ps.mean_estimated_power = pw.mean();
    ps.sd_estimated_power = pw.sd();
    ps.mean_power_variance = var.mean();
    ps.mean_power_se = se.mean();
    ps.mean_theta_bar_hat = th.mean();
    ps.sd_theta_bar_hat = th.sd();
    ps.mean_z = z.mean();
    ps.sd_z = z.sd();
    out.power = ps;
    return out;
}

SimReport estimator_validation(const SimConfig& cfg, const OracleResult& oracle) {
    check_config(cfg);
    const Matrix L = correlation_factor(cfg.scenario.within_subject_corr());
    struct Rep {
        Matrix C, D, se_c, se_d;
    };
    std::vector<Rep> reps(cfg.replicates);
    parallel_for(cfg.replicates, [&](std::size_t r) {
        const auto data = generate_with(cfg.scenario, L, cfg.n_x, cfg.n_y, derive_seed(cfg.seed, r), true);
        if (static_cast<Eigen::Index>(data.visits()) != oracle.C.rows())
            throw Error(ErrorCode::invalid_argument, "replicate visit count does not match the oracle");
        const auto pt = placements(data);
        const auto vc = variance_components(pt);
        const auto se = se_matrices(moment_estimates(pt, vc), vc, data.n_x(), data.n_y());
        reps[r] = {vc.C, vc.D, se.se_c, se.se_d};
    });

    const auto T = oracle.C.rows();
    const double n = static_cast<double>(cfg.replicates);
    const double cells = static_cast<double>(T * T);
    AccuracySummary acc;
    Matrix sum_c = Matrix::Zero(T, T), sum_d = Matrix::Zero(T, T);
    Matrix sq_c = Matrix::Zero(T, T), sq_d = Matrix::Zero(T, T);
    Matrix se_c = Matrix::Zero(T, T), se_d = Matrix::Zero(T, T);
    for (const auto& r : reps) {
        const Matrix ec = r.C - oracle.C, ed = r.D - oracle.D;
        acc.mse_C += ec.squaredNorm() / cells;
        acc.mae_C += ec.cwiseAbs().sum() / cells;
        acc.mse_D += ed.squaredNorm() / cells;
        acc.mae_D += ed.cwiseAbs().sum() / cells;
        sum_c += r.C;
        sum_d += r.D;
        sq_c += r.C.cwiseProduct(r.C);
        sq_d += r.D.cwiseProduct(r.D);
        se_c += r.se_c;
        se_d += r.se_d;
    }
    acc.mse_C /= n;
    acc.mae_C /= n;
    acc.mse_D /= n;
    acc.mae_D /= n;
    acc.mean_C = sum_c / n;
    acc.mean_D = sum_d / n;
    auto sd = [&](const Matrix& sum, const Matrix& sq) {
        Matrix out = Matrix::Zero(T, T);
        if (cfg.replicates < 2) return out;
        for (Eigen::Index i = 0; i < T; ++i)
            for (Eigen::Index j = 0; j < T; ++j) {
                const double m = sum(i, j) / n;
                out(i, j) = std::sqrt(std::max(0.0, (sq(i, j) - n * m * m) / (n - 1.0)));
            }
        return out;
    };
    acc.empirical_se_C = sd(sum_c, sq_c);
    acc.empirical_se_D = sd(sum_d, sq_d);
    acc.plugin_se_C = se_c / n;
    acc.plugin_se_D = se_d / n;

    SimReport out = report_header(cfg);
    out.visits = static_cast<std::size_t>(T);
    out.outcomes = oracle.outcomes();
    out.accuracy = std::move(acc);
    return out;
}

}  // namespace lrst

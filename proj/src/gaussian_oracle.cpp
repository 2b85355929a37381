#include "lrst/gaussian_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "lrst/errors.hpp"
#include "lrst/numeric.hpp"
#include "lrst/parallel.hpp"
#include "lrst/rng.hpp"

namespace lrst {

namespace {

constexpr double corr_tol = 1e-12;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::invalid_argument, what); }

void check_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
    if (m.rows() != rows || m.cols() != cols)
        bad(std::string(name) + " must be " + std::to_string(rows) + " x " + std::to_string(cols) + ", got " +
            std::to_string(m.rows()) + " x " + std::to_string(m.cols()));
    if (!m.allFinite()) bad(std::string(name) + " contains non-finite values");
}

void check_correlation(const Matrix& R, const char* name) {
    for (Eigen::Index i = 0; i < R.rows(); ++i) {
        if (std::abs(R(i, i) - 1.0) > corr_tol) bad(std::string(name) + " must have a unit diagonal");
        for (Eigen::Index j = 0; j < R.cols(); ++j) {
            if (std::abs(R(i, j) - R(j, i)) > corr_tol) bad(std::string(name) + " must be symmetric");
            if (std::abs(R(i, j)) > 1.0 + corr_tol) bad(std::string(name) + " entries must lie in [-1, 1]");
        }
    }
}

Matrix select_rows(const Matrix& m, const std::vector<std::size_t>& keep) {
    Matrix out(static_cast<Eigen::Index>(keep.size()), m.cols());
    for (std::size_t i = 0; i < keep.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(keep[i]));
    return out;
}

Matrix select_square(const Matrix& m, const std::vector<std::size_t>& keep) {
    const auto n = static_cast<Eigen::Index>(keep.size());
    Matrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            out(i, j) = m(static_cast<Eigen::Index>(keep[static_cast<std::size_t>(i)]),
                          static_cast<Eigen::Index>(keep[static_cast<std::size_t>(j)]));
    return out;
}

// Placement of an observation x against a N(mu, sd^2) arm; a point mass when sd == 0.
inline double place(double x, double mu, double sd) noexcept {
    if (sd > 0.0) return numeric::normal_cdf((x - mu) / sd);
    return x > mu ? 1.0 : (x < mu ? 0.0 : 0.5);
}

// Flattened (t * K + k) views of the scenario for one arm.
struct ArmView {
    Vector mu_own, sd_own, mu_other, sd_other, mean;  // mean = population placement mean
};

ArmView arm_view(const Matrix& mu_own, const Matrix& sd_own, const Matrix& mu_other, const Matrix& sd_other,
                 const Matrix& theta, double sign) {
    const auto T = mu_own.rows(), K = mu_own.cols();
    ArmView a;
    a.mu_own.resize(T * K);
    a.sd_own.resize(T * K);
    a.mu_other.resize(T * K);
    a.sd_other.resize(T * K);
    a.mean.resize(T * K);
    for (Eigen::Index t = 0; t < T; ++t)
        for (Eigen::Index k = 0; k < K; ++k) {
            const auto p = t * K + k;
            a.mu_own(p) = mu_own(t, k);
            a.sd_own(p) = sd_own(t, k);
            a.mu_other(p) = mu_other(t, k);
            a.sd_other(p) = sd_other(t, k);
            a.mean(p) = 0.5 * (1.0 + sign * theta(t, k));
        }
    return a;
}

struct Partial {
    Matrix s2, s2sq;      // P x P, upper triangle
    Vector s4, s8;        // P
    Matrix sc, scsq;      // T x T, products of visit-averaged centred placements
    std::size_t n = 0;
};

struct MomentSums {
    Matrix c4, c4_se, agg_se;
    Vector mu4, mu4_se;
};

MomentSums mc_arm(const ArmView& a, const Matrix& L, std::size_t T, std::size_t K, std::size_t samples,
                  std::size_t partitions, std::uint64_t seed) {
    const auto P = static_cast<Eigen::Index>(T * K);
    const auto Ti = static_cast<Eigen::Index>(T);
    std::vector<Partial> parts(partitions);
    parallel_for(partitions, [&](std::size_t part) {
        Partial acc;
        acc.n = samples / partitions + (part < samples % partitions ? 1 : 0);
        acc.s2 = Matrix::Zero(P, P);
        acc.s2sq = Matrix::Zero(P, P);
        acc.s4 = Vector::Zero(P);
        acc.s8 = Vector::Zero(P);
        acc.sc = Matrix::Zero(Ti, Ti);
        acc.scsq = Matrix::Zero(Ti, Ti);
        NormalSampler rng(derive_seed(seed, part));
        Vector z(P), x(P), e(P), abar(Ti);
        for (std::size_t s = 0; s < acc.n; ++s) {
            for (Eigen::Index p = 0; p < P; ++p) z(p) = rng();
            x.noalias() = L * z;
            for (Eigen::Index p = 0; p < P; ++p) {
                const double obs = a.mu_own(p) + a.sd_own(p) * x(p);
                e(p) = place(obs, a.mu_other(p), a.sd_other(p)) - a.mean(p);
            }
            for (Eigen::Index p = 0; p < P; ++p) {
                const double ep = e(p);
                for (Eigen::Index q = p; q < P; ++q) {
                    const double prod = ep * e(q);
                    acc.s2(p, q) += prod;
                    acc.s2sq(p, q) += prod * prod;
                }
                const double e4 = ep * ep * ep * ep;
                acc.s4(p) += e4;
                acc.s8(p) += e4 * e4;
            }
            for (Eigen::Index t = 0; t < Ti; ++t) {
                double s = 0.0;
                for (std::size_t k = 0; k < K; ++k) s += e(t * static_cast<Eigen::Index>(K) + static_cast<Eigen::Index>(k));
                abar(t) = s / static_cast<double>(K);
            }
            for (Eigen::Index t1 = 0; t1 < Ti; ++t1)
                for (Eigen::Index t2 = t1; t2 < Ti; ++t2) {
                    const double prod = abar(t1) * abar(t2);
                    acc.sc(t1, t2) += prod;
                    acc.scsq(t1, t2) += prod * prod;
                }
        }
        parts[part] = std::move(acc);
    });

    Partial tot = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) {
        tot.s2 += parts[i].s2;
        tot.s2sq += parts[i].s2sq;
        tot.s4 += parts[i].s4;
        tot.s8 += parts[i].s8;
        tot.sc += parts[i].sc;
        tot.scsq += parts[i].scsq;
        tot.n += parts[i].n;
    }
    const double n = static_cast<double>(tot.n);
    auto se = [n](double sum, double sumsq) {
        const double m = sum / n;
        return std::sqrt(std::max(0.0, sumsq / n - m * m) / n);
    };
    MomentSums out;
    out.c4.resize(P, P);
    out.c4_se.resize(P, P);
    for (Eigen::Index p = 0; p < P; ++p)
        for (Eigen::Index q = p; q < P; ++q) {
            out.c4(p, q) = out.c4(q, p) = tot.s2(p, q) / n;
            out.c4_se(p, q) = out.c4_se(q, p) = se(tot.s2(p, q), tot.s2sq(p, q));
        }
    out.mu4 = tot.s4 / n;
    out.mu4_se.resize(P);
    for (Eigen::Index p = 0; p < P; ++p) out.mu4_se(p) = se(tot.s4(p), tot.s8(p));
    out.agg_se.resize(Ti, Ti);
    for (Eigen::Index t1 = 0; t1 < Ti; ++t1)
        for (Eigen::Index t2 = t1; t2 < Ti; ++t2)
            out.agg_se(t1, t2) = out.agg_se(t2, t1) = se(tot.sc(t1, t2), tot.scsq(t1, t2));
    return out;
}

MomentSums quadrature_arm(const ArmView& a, const Matrix& R, std::size_t T, std::size_t nodes) {
    const auto P = static_cast<Eigen::Index>(R.rows());
    const auto gh = gauss_hermite_normal(nodes);
    const auto m = static_cast<std::size_t>(gh.nodes.size());
    auto centred = [&](Eigen::Index p, double z) {
        return place(a.mu_own(p) + a.sd_own(p) * z, a.mu_other(p), a.sd_other(p)) - a.mean(p);
    };
    MomentSums out;
    out.c4.resize(P, P);
    out.c4_se = Matrix::Zero(P, P);
    out.mu4.resize(P);
    out.mu4_se = Vector::Zero(P);
    out.agg_se = Matrix::Zero(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(T));
    for (Eigen::Index p = 0; p < P; ++p) {
        double s2 = 0.0, s4 = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double e = centred(p, gh.nodes[i]);
            s2 += gh.weights[i] * e * e;
            s4 += gh.weights[i] * e * e * e * e;
        }
        out.c4(p, p) = s2;
        out.mu4(p) = s4;
        for (Eigen::Index q = p + 1; q < P; ++q) {
            const double rho = std::clamp(R(p, q), -1.0, 1.0);
            const double tail = std::sqrt(std::max(0.0, 1.0 - rho * rho));
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                const double ep = centred(p, gh.nodes[i]);
                double inner = 0.0;
                for (std::size_t j = 0; j < m; ++j)
                    inner += gh.weights[j] * centred(q, rho * gh.nodes[i] + tail * gh.nodes[j]);
                s += gh.weights[i] * ep * inner;
            }
            out.c4(p, q) = out.c4(q, p) = s;
        }
    }
    return out;
}

Matrix to_tk(const Vector& v, std::size_t T, std::size_t K) {
    Matrix out(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(K));
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t k = 0; k < K; ++k)
            out(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) =
                v(static_cast<Eigen::Index>(t * K + k));
    return out;
}

Matrix diag_tk(const Matrix& c4, std::size_t T, std::size_t K) { return to_tk(c4.diagonal(), T, K); }

}  // namespace

void GaussianScenario::validate() const {
    const auto T = mu_control.rows(), K = mu_control.cols();
    if (T < 1 || K < 1) bad("scenario needs at least one visit and one outcome");
    check_shape(mu_control, T, K, "mu_control");
    check_shape(mu_treatment, T, K, "mu_treatment");
    check_shape(sd_control, T, K, "sd_control");
    check_shape(sd_treatment, T, K, "sd_treatment");
    if ((sd_control.array() < 0.0).any() || (sd_treatment.array() < 0.0).any())
        bad("standard deviations must be non-negative");
    check_shape(outcome_corr, K, K, "outcome_corr");
    check_correlation(outcome_corr, "outcome_corr");
    check_shape(time_corr, T, T, "time_corr");
    check_correlation(time_corr, "time_corr");
    if (subject_corr) {
        check_shape(*subject_corr, T * K, T * K, "subject_corr");
        check_correlation(*subject_corr, "subject_corr");
    }
    if (!(lambda > 0.0) || !std::isfinite(lambda)) bad("lambda must be positive");
}

Matrix GaussianScenario::within_subject_corr() const {
    if (subject_corr) return *subject_corr;
    const auto T = time_corr.rows(), K = outcome_corr.rows();
    Matrix R(T * K, T * K);
    for (Eigen::Index t = 0; t < T; ++t)
        for (Eigen::Index s = 0; s < T; ++s) R.block(t * K, s * K, K, K) = time_corr(t, s) * outcome_corr;
    return R;
}

std::vector<std::size_t> GaussianScenario::degenerate_visits() const {
    std::vector<std::size_t> out;
    for (Eigen::Index t = 0; t < mu_control.rows(); ++t) {
        bool flat = true;
        for (Eigen::Index k = 0; k < mu_control.cols() && flat; ++k)
            flat = sd_control(t, k) == 0.0 && sd_treatment(t, k) == 0.0 && mu_control(t, k) == mu_treatment(t, k);
        if (flat) out.push_back(static_cast<std::size_t>(t));
    }
    return out;
}

GaussianScenario GaussianScenario::pruned() const {
    const auto drop = degenerate_visits();
    if (drop.empty()) return *this;
    const std::size_t T = visits(), K = outcomes();
    std::vector<std::size_t> keep, keep_cells;
    for (std::size_t t = 0; t < T; ++t) {
        if (std::find(drop.begin(), drop.end(), t) != drop.end()) continue;
        keep.push_back(t);
        for (std::size_t k = 0; k < K; ++k) keep_cells.push_back(t * K + k);
    }
    GaussianScenario s = *this;
    s.mu_control = select_rows(mu_control, keep);
    s.mu_treatment = select_rows(mu_treatment, keep);
    s.sd_control = select_rows(sd_control, keep);
    s.sd_treatment = select_rows(sd_treatment, keep);
    s.time_corr = select_square(time_corr, keep);
    if (subject_corr) s.subject_corr = select_square(*subject_corr, keep_cells);
    return s;
}

GaussianScenario GaussianScenario::null_version() const {
    GaussianScenario s = *this;
    s.mu_treatment = mu_control;
    return s;
}

GaussianScenario make_scenario(Matrix mu_control, Matrix mu_treatment, Matrix sd_control, Matrix sd_treatment,
                               double lambda, double outcome_correlation) {
    GaussianScenario s;
    const auto T = mu_control.rows(), K = mu_control.cols();
    s.mu_control = std::move(mu_control);
    s.mu_treatment = std::move(mu_treatment);
    s.sd_control = std::move(sd_control);
    s.sd_treatment = std::move(sd_treatment);
    s.outcome_corr = Matrix::Constant(K, K, outcome_correlation);
    s.outcome_corr.diagonal().setOnes();
    s.time_corr = Matrix::Identity(T, T);
    s.lambda = lambda;
    s.validate();
    return s;
}

GaussianScenario bapi302_scenario() {
    Matrix mu_c(7, 2), mu_t(7, 2), sd(7, 2);
    mu_c << 0, 0, -1.38507, -2.65461, -2.77014, -5.30922, -4.15521, -7.96383, -5.54028, -10.61844, -6.92535,
        -13.27305, -8.31042, -15.92766;
    mu_t << 0, 0, -1.016737, -1.757943, -2.033473, -3.515887, -3.05021, -5.27383, -4.066947, -7.031773,
        -5.083683, -8.789717, -6.10042, -10.54766;
    sd << 0, 0, 4.79, 10.27, 5.43, 12.85, 6.54, 14.95, 7.37, 15.35, 8.15, 16.87, 9.11, 18.19;
    auto s = make_scenario(mu_c, mu_t, sd, sd, 2.0 / 3.0, 0.5);
    Matrix cs = Matrix::Constant(14, 14, 0.5);
    cs.diagonal().setOnes();
    s.subject_corr = cs;
    s.validate();
    return s;
}

Matrix correlation_factor(const Matrix& R) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(R);
    if (eig.info() != Eigen::Success)
        throw Error(ErrorCode::non_psd_correlation, "eigendecomposition of the correlation matrix failed");
    Vector ev = eig.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) < -1e-10)
            throw Error(ErrorCode::non_psd_correlation,
                        "correlation matrix is not positive semidefinite (eigenvalue " + std::to_string(ev(i)) + ")");
        ev(i) = std::sqrt(std::max(0.0, ev(i)));
    }
    return eig.eigenvectors() * ev.asDiagonal();
}

std::string to_string(OracleMethod m) { return m == OracleMethod::monte_carlo ? "mc" : "quadrature"; }

OracleMethod parse_oracle_method(const std::string& name) {
    if (name == "mc" || name == "monte_carlo") return OracleMethod::monte_carlo;
    if (name == "quadrature" || name == "quad") return OracleMethod::quadrature;
    bad("unknown oracle method '" + name + "' (expected mc or quadrature)");
}

GaussHermite gauss_hermite_normal(std::size_t n) {
    if (n < 1) bad("quadrature needs at least one node");
    const auto N = static_cast<Eigen::Index>(n);
    // Jacobi matrix of the probabilists' Hermite polynomials.
    Matrix J = Matrix::Zero(N, N);
    for (Eigen::Index i = 1; i < N; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(static_cast<double>(i));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(J);
    GaussHermite gh;
    gh.nodes.resize(n);
    gh.weights.resize(n);
    for (Eigen::Index i = 0; i < N; ++i) {
        gh.nodes[static_cast<std::size_t>(i)] = eig.eigenvalues()(i);
        const double v = eig.eigenvectors()(0, i);
        gh.weights[static_cast<std::size_t>(i)] = v * v;
    }
    return gh;
}

ThetaOracle oracle_theta(const GaussianScenario& input) {
    input.validate();
    const auto s = input.pruned();
    const auto T = s.mu_control.rows(), K = s.mu_control.cols();
    ThetaOracle out;
    out.theta.resize(T, K);
    for (Eigen::Index t = 0; t < T; ++t)
        for (Eigen::Index k = 0; k < K; ++k) {
            const double sx = s.sd_control(t, k), sy = s.sd_treatment(t, k);
            if (sx == 0.0 && sy == 0.0)
                throw Error(ErrorCode::both_sd_zero, "sd is zero in both arms at analysed visit " +
                                                         std::to_string(t + 1) + ", outcome " + std::to_string(k + 1));
            const double delta = s.mu_treatment(t, k) - s.mu_control(t, k);
            out.theta(t, k) = std::erf(delta / std::sqrt(2.0 * (sx * sx + sy * sy)));
        }
    out.theta_bar = out.theta.mean();
    return out;
}

OracleResult oracle_cd(const GaussianScenario& input, const OracleConfig& cfg) {
    OracleResult r;
    r.theta = oracle_theta(input);
    const auto s = input.pruned();
    r.pruned_visits = input.degenerate_visits();
    r.method = cfg.method;
    r.seed = cfg.seed;
    const std::size_t T = s.visits(), K = s.outcomes();
    const Matrix R = s.within_subject_corr();

    const auto u = arm_view(s.mu_control, s.sd_control, s.mu_treatment, s.sd_treatment, r.theta.theta, -1.0);
    const auto v = arm_view(s.mu_treatment, s.sd_treatment, s.mu_control, s.sd_control, r.theta.theta, +1.0);

    MomentSums mu, mv;
    if (cfg.method == OracleMethod::monte_carlo) {
        if (cfg.mc_samples < 10'000) bad("mc_samples must be at least 10000");
        if (cfg.partitions < 1) bad("partitions must be positive");
        const Matrix L = correlation_factor(R);
        mu = mc_arm(u, L, T, K, cfg.mc_samples, cfg.partitions, derive_seed(cfg.seed, 0));
        mv = mc_arm(v, L, T, K, cfg.mc_samples, cfg.partitions, derive_seed(cfg.seed, 1));
        r.samples = cfg.mc_samples;
    } else {
        if ((s.sd_control.array() <= 0.0).any() || (s.sd_treatment.array() <= 0.0).any())
            bad("quadrature requires positive standard deviations at every analysed cell");
        correlation_factor(R);  // PSD check
        mu = quadrature_arm(u, R, T, cfg.quadrature_nodes);
        mv = quadrature_arm(v, R, T, cfg.quadrature_nodes);
        r.samples = 0;
    }

    r.c4 = mu.c4;
    r.d4 = mv.c4;
    r.c4_se = mu.c4_se;
    r.d4_se = mv.c4_se;
    r.C = aggregate_cells(r.c4, T, K);
    r.D = aggregate_cells(r.d4, T, K);
    r.C_se = mu.agg_se;
    r.D_se = mv.agg_se;
    r.mu4_u_se = to_tk(mu.mu4_se, T, K);
    r.mu4_v_se = to_tk(mv.mu4_se, T, K);
    const double lambda = s.lambda;
    r.moments = assemble_moments(diag_tk(r.c4, T, K), diag_tk(r.d4, T, K), to_tk(mu.mu4, T, K),
                                 to_tk(mv.mu4, T, K), r.c4, r.d4, 1.0 + 1.0 / lambda, 1.0 + lambda);
    return r;
}

}  // namespace lrst

#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "lrst/errors.hpp"
#include "lrst/gaussian_oracle.hpp"
#include "lrst/numeric.hpp"

using namespace lrst;

namespace {

GaussianScenario small_scenario(double rho_time = 0.0) {
    Matrix mu_c(2, 2), mu_t(2, 2), sd_c(2, 2), sd_t(2, 2);
    mu_c << 0.0, 1.0, -0.5, 0.2;
    mu_t << 0.4, 1.3, 0.1, 0.2;
    sd_c << 1.0, 2.0, 1.5, 0.7;
    sd_t << 1.2, 1.8, 1.1, 0.9;
    auto s = make_scenario(mu_c, mu_t, sd_c, sd_t, 0.75, 0.5);
    s.time_corr(0, 1) = s.time_corr(1, 0) = rho_time;
    s.validate();
    return s;
}

struct ThreadEnv {
    explicit ThreadEnv(const char* v) { setenv("LRST_THREADS", v, 1); }
    ~ThreadEnv() { unsetenv("LRST_THREADS"); }
};

}  // namespace

TEST_CASE("closed-form theta") {
    auto s = small_scenario();
    const auto th = oracle_theta(s);
    CHECK(th.theta(1, 1) == 0.0);
    CHECK(th.theta(0, 0) == doctest::Approx(2 * numeric::normal_cdf(0.4 / std::sqrt(1.0 + 1.44)) - 1).epsilon(1e-14));
    CHECK(th.theta_bar == doctest::Approx(th.theta.mean()));

    const auto b = oracle_theta(bapi302_scenario());
    CHECK(b.theta.rows() == 6);
    CHECK(b.theta(5, 0) == doctest::Approx(0.13619879822498726).epsilon(1e-12));
    CHECK(std::abs(b.theta(5, 0) - 0.1362) < 5e-5);
}

TEST_CASE("arm swap negates theta exactly") {
    auto s = small_scenario();
    auto w = s;
    std::swap(w.mu_control, w.mu_treatment);
    std::swap(w.sd_control, w.sd_treatment);
    CHECK(oracle_theta(w).theta == (-oracle_theta(s).theta).eval());
}

TEST_CASE("both SDs zero at an analysed cell") {
    auto s = small_scenario();
    s.sd_control(0, 1) = s.sd_treatment(0, 1) = 0.0;
    try {
        oracle_theta(s);
        FAIL("expected BothSdZero");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::both_sd_zero);
    }
}

TEST_CASE("degenerate visits and pruning") {
    const auto s = bapi302_scenario();
    CHECK(s.visits() == 7);
    CHECK(s.degenerate_visits() == std::vector<std::size_t>{0});
    const auto p = s.pruned();
    CHECK(p.visits() == 6);
    CHECK(p.subject_corr->rows() == 12);
    CHECK(p.mu_treatment(5, 0) == -6.10042);
    CHECK(p.pruned().visits() == 6);
    const auto n = s.null_version();
    CHECK(n.mu_treatment == n.mu_control);
    CHECK(oracle_theta(n).theta_bar == 0.0);
}

TEST_CASE("bundled scenario values") {
    const auto s = bapi302_scenario();
    CHECK(s.mu_treatment(6, 0) == -6.10042);
    CHECK(s.sd_control(1, 1) == 10.27);
    CHECK(s.sd_treatment(1, 1) == 10.27);
    CHECK(s.outcome_corr(0, 1) == 0.5);
    CHECK(s.lambda == doctest::Approx(2.0 / 3.0));
    CHECK(s.within_subject_corr()(0, 13) == 0.5);
}

TEST_CASE("scenario JSON round trip") {
    const auto s = bapi302_scenario();
    const auto back = scenario_from_json(scenario_to_json(s));
    CHECK(back.mu_control == s.mu_control);
    CHECK(back.mu_treatment == s.mu_treatment);
    CHECK(back.sd_control == s.sd_control);
    CHECK(back.outcome_corr == s.outcome_corr);
    CHECK(back.time_corr == s.time_corr);
    CHECK(*back.subject_corr == *s.subject_corr);
    CHECK(back.lambda == s.lambda);
    CHECK(scenario_to_json(back) == scenario_to_json(s));

    const auto minimal = scenario_from_json(R"({"mu_control": [[0]], "mu_treatment": [[1]], "sd_control": [[1]],
        "sd_treatment": [[1]], "outcome_corr": [[1]], "lambda": 1})");
    CHECK(minimal.time_corr == Matrix::Identity(1, 1));
    CHECK_FALSE(minimal.subject_corr);
}

TEST_CASE("scenario JSON errors") {
    auto code = [](const std::string& text) {
        try {
            scenario_from_json(text);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::io_error;
    };
    CHECK(code("{") == ErrorCode::parse_error);
    CHECK(code("[]") == ErrorCode::parse_error);
    CHECK(code(R"({"mu_control": [[0]]})") == ErrorCode::parse_error);
    CHECK(code(R"({"mu_control": [[0, 1], [2]], "mu_treatment": [[1]], "sd_control": [[1]], "sd_treatment": [[1]],
        "outcome_corr": [[1]], "lambda": 1})") == ErrorCode::parse_error);
    CHECK(code(R"({"mu_control": [[0]], "mu_treatment": [[1]], "sd_control": [[-1]], "sd_treatment": [[1]],
        "outcome_corr": [[1]], "lambda": 1})") == ErrorCode::invalid_argument);
    CHECK(code(R"({"mu_control": [[0]], "mu_treatment": [[1]], "sd_control": [[1]], "sd_treatment": [[1]],
        "outcome_corr": [[1]], "lambda": 0})") == ErrorCode::invalid_argument);
    CHECK(code(R"({"mu_control": [[0, 0]], "mu_treatment": [[1, 1]], "sd_control": [[1, 1]], "sd_treatment": [[1, 1]],
        "outcome_corr": [[1, 0.2], [0.3, 1]], "lambda": 1})") == ErrorCode::invalid_argument);
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), Error);
}

TEST_CASE("correlation factor") {
    Matrix R(3, 3);
    R << 1, 0.5, 0.2, 0.5, 1, 0.3, 0.2, 0.3, 1;
    const Matrix L = correlation_factor(R);
    CHECK((L * L.transpose() - R).cwiseAbs().maxCoeff() < 1e-14);
    Matrix singular = Matrix::Ones(3, 3);
    const Matrix Ls = correlation_factor(singular);
    CHECK((Ls * Ls.transpose() - singular).cwiseAbs().maxCoeff() < 1e-12);
    Matrix bad(3, 3);
    bad << 1, 0.9, -0.9, 0.9, 1, 0.9, -0.9, 0.9, 1;
    try {
        correlation_factor(bad);
        FAIL("expected NonPSDCorrelation");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::non_psd_correlation);
    }
    auto s = small_scenario();
    s.subject_corr = Matrix::Identity(4, 4);
    (*s.subject_corr)(0, 1) = (*s.subject_corr)(1, 0) = 0.99;
    (*s.subject_corr)(0, 2) = (*s.subject_corr)(2, 0) = 0.99;
    (*s.subject_corr)(1, 2) = (*s.subject_corr)(2, 1) = -0.99;
    CHECK_THROWS_AS(oracle_cd(s, OracleConfig{OracleMethod::monte_carlo, 10000, 1}), Error);
}

TEST_CASE("Gauss-Hermite rule integrates normal moments") {
    const auto gh = gauss_hermite_normal(64);
    double m0 = 0, m2 = 0, m4 = 0, m1 = 0;
    for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
        const double x = gh.nodes[i], w = gh.weights[i];
        m0 += w;
        m1 += w * x;
        m2 += w * x * x;
        m4 += w * x * x * x * x;
    }
    CHECK(m0 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(m1) < 1e-12);
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m4 == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("Monte Carlo and quadrature agree") {
    const auto s = small_scenario(0.3);
    OracleConfig mc;
    mc.seed = 99;
    mc.mc_samples = 400'000;
    OracleConfig quad;
    quad.method = OracleMethod::quadrature;
    const auto a = oracle_cd(s, mc);
    const auto b = oracle_cd(s, quad);
    for (Eigen::Index p = 0; p < 4; ++p) {
        for (Eigen::Index q = 0; q < 4; ++q) {
            CHECK(std::abs(a.c4(p, q) - b.c4(p, q)) <= 4.0 * a.c4_se(p, q) + 1e-12);
            CHECK(std::abs(a.d4(p, q) - b.d4(p, q)) <= 4.0 * a.d4_se(p, q) + 1e-12);
        }
    }
    for (Eigen::Index t = 0; t < 2; ++t)
        for (Eigen::Index k = 0; k < 2; ++k) {
            CHECK(std::abs(a.moments.mu4_u(t, k) - b.moments.mu4_u(t, k)) <= 4.0 * a.mu4_u_se(t, k) + 1e-12);
            CHECK(std::abs(a.moments.mu4_v(t, k) - b.moments.mu4_v(t, k)) <= 4.0 * a.mu4_v_se(t, k) + 1e-12);
        }
    CHECK(b.c4_se.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("diagonal c equals Var[Phi(aZ + b)] by direct quadrature") {
    // Control N(0.3, 1.4^2) placed against treatment N(-0.2, 0.8^2).
    Matrix mu_c(1, 1), mu_t(1, 1), sd_c(1, 1), sd_t(1, 1);
    mu_c << 0.3;
    mu_t << -0.2;
    sd_c << 1.4;
    sd_t << 0.8;
    const auto s = make_scenario(mu_c, mu_t, sd_c, sd_t);
    OracleConfig mc;
    mc.seed = 5;
    mc.mc_samples = 1'000'000;
    const auto o = oracle_cd(s, mc);
    OracleConfig quad;
    quad.method = OracleMethod::quadrature;
    const auto g = oracle_cd(s, quad);
    // Composite Simpson on [-10, 10] of Phi(a z + b)^k phi(z).
    const double a = 1.4 / 0.8, b = 0.5 / 0.8;
    const int n = 20000;
    const double h = 20.0 / n;
    double e1 = 0, e2 = 0;
    for (int i = 0; i <= n; ++i) {
        const double z = -10.0 + i * h;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        const double g = numeric::normal_cdf(a * z + b);
        e1 += w * g * numeric::normal_pdf(z);
        e2 += w * g * g * numeric::normal_pdf(z);
    }
    e1 *= h / 3;
    e2 *= h / 3;
    CHECK(std::abs(g.c4(0, 0) - (e2 - e1 * e1)) <= 1e-10);
    CHECK(std::abs(g.c4(0, 0) - o.c4(0, 0)) <= std::max(1e-4, 4.0 * o.c4_se(0, 0)));
    CHECK(std::abs(o.c4(0, 0) - (e2 - e1 * e1)) <= 4.0 * o.c4_se(0, 0));
    CHECK(std::abs(e1 - (1 - o.theta.theta(0, 0)) / 2) < 1e-10);
}

TEST_CASE("independent coordinates have zero cross covariance") {
    const auto s = small_scenario(0.0);
    auto ind = s;
    ind.outcome_corr = Matrix::Identity(2, 2);
    OracleConfig mc;
    mc.seed = 8;
    mc.mc_samples = 100'000;
    const auto o = oracle_cd(ind, mc);
    for (Eigen::Index p = 0; p < 4; ++p)
        for (Eigen::Index q = 0; q < 4; ++q) {
            if (p == q) continue;
            CHECK(std::abs(o.c4(p, q)) <= 3.0 * o.c4_se(p, q));
            CHECK(std::abs(o.d4(p, q)) <= 3.0 * o.d4_se(p, q));
        }
}

TEST_CASE("oracle tensors are symmetric with nonnegative diagonals") {
    OracleConfig mc;
    mc.seed = 3;
    mc.mc_samples = 50'000;
    const auto o = oracle_cd(bapi302_scenario(), mc);
    CHECK(o.c4.rows() == 12);
    CHECK(o.C.rows() == 6);
    CHECK(o.pruned_visits == std::vector<std::size_t>{0});
    CHECK((o.c4 - o.c4.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((o.d4 - o.d4.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(o.c4.diagonal().minCoeff() >= 0.0);
    CHECK(o.d4.diagonal().minCoeff() >= 0.0);
    CHECK((o.C - aggregate_cells(o.c4, 6, 2)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(o.moments.K1.minCoeff() >= 0.0);
}

TEST_CASE("oracle is bitwise deterministic across thread counts") {
    OracleConfig mc;
    mc.seed = 12345;
    mc.mc_samples = 60'000;
    const auto s = bapi302_scenario();
    OracleResult one, four;
    {
        ThreadEnv env("1");
        one = oracle_cd(s, mc);
    }
    {
        ThreadEnv env("4");
        four = oracle_cd(s, mc);
    }
    CHECK(one.c4 == four.c4);
    CHECK(one.d4 == four.d4);
    CHECK(one.C_se == four.C_se);
    CHECK(one.moments.mu4_u == four.moments.mu4_u);
    mc.seed = 12346;
    CHECK(oracle_cd(s, mc).c4 != one.c4);
}

TEST_CASE("oracle config validation") {
    OracleConfig mc;
    mc.mc_samples = 9999;
    CHECK_THROWS_AS(oracle_cd(small_scenario(), mc), Error);
    auto s = small_scenario();
    s.sd_control(0, 0) = 0.0;
    OracleConfig quad;
    quad.method = OracleMethod::quadrature;
    CHECK_THROWS_AS(oracle_cd(s, quad), Error);
    CHECK(parse_oracle_method("mc") == OracleMethod::monte_carlo);
    CHECK(parse_oracle_method("quadrature") == OracleMethod::quadrature);
    CHECK_THROWS_AS(parse_oracle_method("simpson"), Error);
}

TEST_CASE("point-mass arm uses the half-tie placement") {
    Matrix mu_c(1, 1), mu_t(1, 1), sd_c(1, 1), sd_t(1, 1);
    mu_c << 0.0;
    mu_t << 0.5;
    sd_c << 1.0;
    sd_t << 0.0;
    const auto s = make_scenario(mu_c, mu_t, sd_c, sd_t);
    OracleConfig mc;
    mc.seed = 1;
    mc.mc_samples = 200'000;
    const auto o = oracle_cd(s, mc);
    // U = I(X > 0.5): variance p (1 - p) with p = 1 - Phi(0.5).
    const double p = numeric::normal_sf(0.5);
    CHECK(std::abs(o.c4(0, 0) - p * (1 - p)) <= 4 * o.c4_se(0, 0));
    CHECK(o.d4(0, 0) <= 1e-20);
}

// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "brute_force.hpp"
#include "lrst/errors.hpp"
#include "lrst/gaussian_oracle.hpp"
#include "lrst/lrst_inference.hpp"
#include "lrst/power_design.hpp"
#include "lrst/rank_engine.hpp"
#include "lrst/sim_engine.hpp"
#include "lrst/variance_components.hpp"

using namespace lrst;

namespace {

constexpr double alpha = 0.05;
constexpr double lambda = 2.0 / 3.0;
constexpr std::uint64_t oracle_seed = 20240601;
constexpr std::uint64_t sim_seed = 302;
const std::size_t sizes[] = {100, 300, 500};

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

void note(const std::string& text) {
    std::printf("    note: %s\n", text.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SimConfig sim_config(const GaussianScenario& s, std::size_t N, std::size_t reps, std::uint64_t seed) {
    SimConfig c;
    std::tie(c.n_x, c.n_y) = split_sample(N, s.lambda);
    c.replicates = reps;
    c.alpha = alpha;
    c.seed = seed;
    c.scenario = s;
    return c;
}

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol + 1e-12; }

}  // namespace

int main() {
    const auto scenario = bapi302_scenario();

    // 1. Theoretical power from the Monte Carlo oracle.
    const auto t1 = std::chrono::steady_clock::now();
    OracleConfig ocfg;
    ocfg.seed = oracle_seed;
    ocfg.mc_samples = 1'000'000;
    const auto oracle = oracle_cd(scenario, ocfg);
    const double theta_bar = oracle.theta.theta_bar;
    const std::size_t T = oracle.visits();
    {
        const double target[] = {0.35, 0.70, 0.87};
        bool ok = true;
        std::string detail = "theoretical power (lambda=2/3)";
        for (int i = 0; i < 3; ++i) {
            const double p = theoretical_power(theta_bar, oracle.C, oracle.D, lambda, sizes[i], T, alpha).power;
            ok = ok && within(p, target[i], 0.02);
            detail += fmt(" N=%zu: %.4f (ref %.2f)", sizes[i], p, target[i]);
        }
        const double secs = seconds_since(t1);
        ok = ok && secs < 60.0;
        report(1, ok, detail + fmt("; tol 0.02; %.1fs (limit 60s)", secs));
    }

    // 2. Empirical power, 2000 replicates per N.
    const auto t2 = std::chrono::steady_clock::now();
    std::vector<SimReport> power_runs;
    {
        const double target[] = {0.35, 0.68, 0.86};
        bool ok = true;
        std::string detail = "empirical power, 2000 reps";
        for (int i = 0; i < 3; ++i) {
            power_runs.push_back(empirical_power(sim_config(scenario, sizes[i], 2000, sim_seed + i)));
            const auto& p = *power_runs.back().power;
            ok = ok && within(p.empirical_power, target[i], 0.03);
            detail += fmt(" N=%zu: %.4f+-%.4f (ref %.2f)", sizes[i], p.empirical_power, p.empirical_power_se, target[i]);
        }
        const double secs = seconds_since(t2);
        ok = ok && secs < 300.0;
        report(2, ok, detail + fmt("; tol 0.03; %.1fs (limit 300s)", secs));
    }

    // 3. Estimated power distribution at N = 500.
    {
        const auto& p = *power_runs[2].power;
        const bool ok = within(p.mean_estimated_power, 0.85, 0.03) && within(p.sd_estimated_power, 0.04, 0.02);
        report(3, ok,
               fmt("estimated power at N=500: mean %.4f (ref 0.85 +-0.03), SD %.4f (ref 0.04 +-0.02)",
                   p.mean_estimated_power, p.sd_estimated_power));
        if (!ok) {
            note(fmt("SD(z) across replicates is %.3f and P_hat = Phi(z - z_alpha) up to the theta-vs-rank identity,",
                     p.sd_z));
            note("so SD(P_hat) is about phi(E z - z_alpha) * SD(z), near 0.2; an SD of 0.04 would need SD(z) near 0.1.");
        }
    }

    // 4. Required sample sizes, 18 entries.
    {
        const int ref[2][9] = {{7, 34, 65, 99, 139, 185, 242, 318, 443}, {7, 32, 62, 96, 134, 179, 232, 305, 423}};
        const double lambdas[2] = {2.0 / 3.0, 1.0};
        int hits = 0;
        std::string rows;
        for (int l = 0; l < 2; ++l) {
            rows += l == 0 ? " lambda=2/3:" : "; lambda=1:";
            for (int i = 0; i < 9; ++i) {
                const double pi = 0.1 * (i + 1);
                const auto s = required_sample_size(theta_bar, oracle.C, oracle.D, lambdas[l], T, alpha, pi);
                const double tol = std::max(0.02 * ref[l][i], 3.0);
                const bool hit = std::abs(static_cast<double>(s.n) - ref[l][i]) <= tol;
                hits += hit;
                rows += fmt(" %zu/%d%s", s.n, ref[l][i], hit ? "" : "*");
            }
        }
        report(4, hits == 18, fmt("sample sizes within max(2%%, 3): %d/18 match;", hits) + rows);
        if (hits != 18) {
            // Both power and sample size depend on the scenario only through
            // kappa = theta_bar T / 2 * sqrt(lambda / ((1 + lambda) q)).
            const double q23 = oracle.C.sum() + lambda * oracle.D.sum();
            const double kappa = theta_bar * T / 2.0 * std::sqrt(lambda / ((1.0 + lambda) * q23));
            const double z = 1.6448536269514722;
            const double from_power = (z + 1.1263911290388013) / std::sqrt(500.0);  // Phi^-1(0.87) at N=500
            const double from_size = (z + 0.8416212335729143) / std::sqrt(318.0);   // pi=0.8, lambda=2/3
            note(fmt("scenario kappa %.4f; the reference power curve implies %.4f, the reference sample sizes imply %.4f.",
                     kappa, from_power, from_size));
            note("no single scenario satisfies both reference sets; this build keeps the one matching the power curve.");
        }
    }

    // 5 and 6. Estimator accuracy and SE calibration, 1000 replicates per N.
    std::vector<SimReport> val_runs;
    for (int i = 0; i < 3; ++i)
        val_runs.push_back(estimator_validation(sim_config(scenario, sizes[i], 1000, sim_seed + 10 + i), oracle));
    {
        const double ref_mse_c[] = {0.0027, 0.0018, 0.0016}, ref_mae_c[] = {0.041, 0.034, 0.032};
        const double ref_mse_d[] = {0.002, 0.001, 0.001}, ref_mae_d[] = {0.038, 0.033, 0.032};
        auto rel = [](double v, double r) { return std::abs(v - r) <= 0.3 * r; };
        bool close = true, monotone = true;
        std::string detail = "C/D accuracy, 1000 reps (mse_C mae_C mse_D mae_D):";
        for (int i = 0; i < 3; ++i) {
            const auto& a = *val_runs[i].accuracy;
            close = close && rel(a.mse_C, ref_mse_c[i]) && rel(a.mae_C, ref_mae_c[i]) && rel(a.mse_D, ref_mse_d[i]) &&
                    rel(a.mae_D, ref_mae_d[i]);
            if (i > 0) {
                const auto& b = *val_runs[i - 1].accuracy;
                monotone = monotone && a.mse_C <= b.mse_C && a.mae_C <= b.mae_C && a.mse_D <= b.mse_D &&
                           a.mae_D <= b.mae_D;
            }
            detail += fmt(" N=%zu: %.2e %.4f %.2e %.4f (ref %.4f %.3f %.3f %.3f)", sizes[i], a.mse_C, a.mae_C, a.mse_D,
                          a.mae_D, ref_mse_c[i], ref_mae_c[i], ref_mse_d[i], ref_mae_d[i]);
        }
        report(5, close && monotone,
               detail + fmt("; within 30%%: %s; non-increasing: %s", close ? "yes" : "no", monotone ? "yes" : "no"));
    }
    {
        const auto& a = *val_runs[2].accuracy;
        const double sd_c = a.empirical_se_C(0, 0), sd_d = a.empirical_se_D(0, 0);
        const bool spot = std::abs(sd_c - 0.019) <= 0.15 * 0.019 && std::abs(sd_d - 0.018) <= 0.15 * 0.018;
        int agree = 0, total = 0;
        for (const auto* pair : {&a.empirical_se_C, &a.empirical_se_D}) {
            const Matrix& emp = *pair;
            const Matrix& plug = pair == &a.empirical_se_C ? a.plugin_se_C : a.plugin_se_D;
            for (Eigen::Index i = 0; i < emp.rows(); ++i)
                for (Eigen::Index j = 0; j < emp.cols(); ++j) {
                    ++total;
                    agree += std::abs(plug(i, j) - emp(i, j)) <= 0.15 * emp(i, j);
                }
        }
        const bool calib = agree >= 0.8 * total;
        report(6, spot && calib,
               fmt("N=500 SD of C[1][1] %.4f (ref 0.019), D[1][1] %.4f (ref 0.018); plug-in SE within 15%% of "
                   "empirical on %d/%d entries (need 80%%); plug-in C[1][1] %.4f",
                   sd_c, sd_d, agree, total, a.plugin_se_C(0, 0)));
        if (!spot || !calib) {
            note(fmt("placements live in [0, 1]; the reference SDs are about %.1fx the observed ones, consistent with "
                     "a +-1 placement scale (factor 4 on C and D).",
                     0.019 / sd_c));
            note("the plug-in SE is also below the empirical SD on every entry at N=500; see the ledger.");
        }
    }

    // 7. Type-I calibration.
    {
        const auto r = empirical_power(sim_config(scenario.null_version(), 500, 2000, sim_seed + 20));
        const double p = r.power->empirical_power;
        report(7, within(p, 0.05, 0.01), fmt("null rejection rate %.4f+-%.4f at N=500, 2000 reps (ref 0.05 +-0.01)", p,
                                             r.power->empirical_power_se));
    }

    // 8. Brute-force equivalence on small random instances.
    {
        std::mt19937_64 gen(8);
        int instances = 0, mismatches = 0, skipped = 0;
        double worst = 0.0;
        while (instances < 200) {
            const auto d = testing::random_trial(gen);
            double z = 0.0;
            try {
                z = lrst_test(d, alpha).z;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::degenerate_variance) throw;
                ++skipped;
                continue;
            }
            ++instances;
            const auto pt = placements(d);
            const auto r = rank_summary(d);
            auto check = [&](double a, double b, double scale) {
                const double err = std::abs(a - b) / std::max(1.0, scale);
                worst = std::max(worst, err);
                if (err > 1e-12) ++mismatches;
            };
            for (std::size_t t1 = 0; t1 < d.visits(); ++t1)
                for (std::size_t k1 = 0; k1 < d.outcomes(); ++k1) {
                    check(r.theta_hat(t1, k1), testing::bf_theta(d, t1, k1), 1.0);
                    for (std::size_t t2 = 0; t2 < d.visits(); ++t2)
                        for (std::size_t k2 = 0; k2 < d.outcomes(); ++k2) {
                            check(c_hat(pt, t1, k1, t2, k2), testing::bf_c(d, t1, k1, t2, k2), 1.0);
                            check(d_hat(pt, t1, k1, t2, k2), testing::bf_d(d, t1, k1, t2, k2), 1.0);
                        }
                }
            const double bz = testing::bf_z(d);
            check(z, bz, std::abs(bz));
        }
        report(8, mismatches == 0,
               fmt("brute-force c/d/theta/z on %d instances (n<=6, T,K<=2): %d mismatches, worst %.2e (tol 1e-12); "
                   "%d zero-variance draws skipped",
                   instances, mismatches, worst, skipped));
    }

    // 9. Identity suite.
    {
        std::mt19937_64 gen(9);
        double rank_vs_indicator = 0.0;
        bool monotone = true, swap = true;
        for (int rep = 0; rep < 200; ++rep) {
            const auto d = testing::random_trial(gen, 10, 3, 5);
            rank_vs_indicator =
                std::max(rank_vs_indicator, (rank_summary(d).theta_hat - theta_hat_pairwise(d)).cwiseAbs().maxCoeff());
            Array3 x = d.x, y = d.y;
            for (auto& v : x.flat()) v = std::sinh(v) * 5.0 + 2.0;
            for (auto& v : y.flat()) v = std::sinh(v) * 5.0 + 2.0;
            try {
                const auto a = lrst_test(d, alpha);
                monotone = monotone && lrst_test(make_trial_data(x, y), alpha).z == a.z;
                swap = swap && lrst_test(testing::swap_arms(d), alpha).z == -a.z;
            } catch (const Error&) {
            }
        }
        const double null_power =
            std::abs(theoretical_power(0.0, oracle.C, oracle.D, lambda, 300, T, alpha).power - alpha);
        double inversion = 0.0;
        bool achieved = true;
        for (double pi = 0.1; pi < 0.95; pi += 0.1) {
            const auto s = required_sample_size(theta_bar, oracle.C, oracle.D, lambda, T, alpha, pi);
            inversion =
                std::max(inversion, std::abs(theoretical_power(theta_bar, oracle.C, oracle.D, lambda, s.n_raw, T, alpha)
                                                 .power -
                                             pi));
            achieved = achieved && s.achieved_power >= pi - 1e-9;
        }
        const bool ok = rank_vs_indicator <= 1e-9 && monotone && swap && null_power <= 1e-9 && inversion <= 1e-9 &&
                        achieved;
        report(9, ok,
               fmt("rank-vs-indicator max diff %.1e; monotone z %s; swap z %s; |power(theta=0) - alpha| %.1e; "
                   "sample-size inversion %.1e; achieved >= target %s",
                   rank_vs_indicator, monotone ? "bitwise" : "differs", swap ? "exact" : "differs", null_power,
                   inversion, achieved ? "yes" : "no"));
    }

    // 10. Variance of the estimated power against its across-replicate SD.
    {
        bool tracks = true, printed_off = true;
        std::string detail = "mean reported SE vs SD(P_hat):";
        for (int i = 1; i < 3; ++i) {
            const auto& p = *power_runs[i].power;
            const double N = static_cast<double>(sizes[i]);
            const double derived = p.mean_power_se;
            const double printed = std::sqrt(N) * p.mean_power_se;
            const double rel = std::abs(derived - p.sd_estimated_power) / p.sd_estimated_power;
            const double ratio_printed = printed / p.sd_estimated_power;
            tracks = tracks && rel <= 0.25;
            printed_off = printed_off && (ratio_printed >= 10.0 || ratio_printed <= 0.1);
            detail += fmt(" N=%zu: SD %.4f, derived SE %.5f (rel err %.2f), with-N SE %.4f (ratio %.2f)", sizes[i],
                          p.sd_estimated_power, derived, rel, printed, ratio_printed);
        }
        report(10, tracks && printed_off,
               detail + fmt("; derived within 25%%: %s; with-N form off by >=10x: %s", tracks ? "yes" : "no",
                            printed_off ? "yes" : "no"));
        if (!tracks) {
            note("the delta-method variance keeps only the J'Sigma J term; the theta_bar_hat term it drops is O(1) "
                 "after scaling and dominates SD(P_hat).");
        }
    }

    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}

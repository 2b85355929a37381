#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "lrst/gaussian_oracle.hpp"
#include "lrst/trial_data.hpp"

namespace lrst {

/// Draws n_x control and n_y treatment subjects from the scenario. Degenerate
/// visits are generated and then removed by validate_and_prune unless prune is false.
TrialData generate_trial(const GaussianScenario& s, std::size_t n_x, std::size_t n_y, std::uint64_t seed,
                         bool prune = true);

struct SimConfig {
    std::size_t n_x = 0;
    std::size_t n_y = 0;
    std::size_t replicates = 1000;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    GaussianScenario scenario;
};

/// Splits N by lambda = n_x / n_y with n_x = round(N lambda / (1 + lambda)).
std::pair<std::size_t, std::size_t> split_sample(std::size_t N, double lambda);

struct PowerSummary {
    std::size_t rejections = 0;
    double empirical_power = 0.0;
    double empirical_power_se = 0.0;  // binomial
    double mean_estimated_power = 0.0;
    double sd_estimated_power = 0.0;
    double mean_power_variance = 0.0;  // mean of Var(P_hat)
    double mean_power_se = 0.0;        // mean of sqrt(Var(P_hat))
    double mean_theta_bar_hat = 0.0;
    double sd_theta_bar_hat = 0.0;
    double mean_z = 0.0;
    double sd_z = 0.0;
};

struct AccuracySummary {
    double mse_C = 0.0, mae_C = 0.0;
    double mse_D = 0.0, mae_D = 0.0;
    Matrix mean_C, mean_D;
    Matrix empirical_se_C, empirical_se_D;  // across-replicate SD (n - 1 divisor)
    Matrix plugin_se_C, plugin_se_D;        // mean of se_matrices
};

struct SimReport {
    std::size_t replicate_count = 0;
    std::uint64_t seed = 0;
    std::size_t n_x = 0;
    std::size_t n_y = 0;
    double alpha = 0.05;
    std::size_t visits = 0;
    std::size_t outcomes = 0;
    std::optional<PowerSummary> power;
    std::optional<AccuracySummary> accuracy;
};

/// Rejection rate of lrst_test and the distribution of the estimated power.
SimReport empirical_power(const SimConfig& cfg);

/// MSE/MAE of C_hat, D_hat against the oracle plus empirical and plug-in SEs.
SimReport estimator_validation(const SimConfig& cfg, const OracleResult& oracle);

}  // namespace lrst

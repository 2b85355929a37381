#pragma once

#include <cstddef>
#include <optional>

#include "lrst/rank_engine.hpp"
#include "lrst/trial_data.hpp"
#include "lrst/variance_components.hpp"

namespace lrst {

struct PowerResult {
    double power = 0.0;
    double noncentrality = 0.0;  // power = Phi(noncentrality - z_alpha)
    double theta_bar = 0.0;      // population or estimated global effect
    double quad_form = 0.0;      // J'(C + lambda D)J (theoretical) or J' Sigma_hat J (estimated)
    double N = 0.0;
    double lambda = 1.0;
    std::size_t visits = 0;
    double alpha = 0.05;
    std::optional<double> variance;  // Var(P_hat), estimated power only
    std::optional<double> se;
    std::optional<double> var_inf;   // the G/H bracket
};

/// Closed-form power of the one-sided LRST:
///   Phi(theta_bar / sqrt(4 (1 + lambda) J'(C + lambda D)J / (N lambda T^2)) - z_alpha).
PowerResult theoretical_power(double theta_bar, const Matrix& C, const Matrix& D, double lambda, double N,
                              std::size_t visits, double alpha);

struct SampleSizeResult {
    double n_raw = 0.0;
    std::size_t n = 0;
    std::size_t n_x = 0;
    std::size_t n_y = 0;
    double achieved_power = 0.0;
    double target_power = 0.0;
    double lambda = 1.0;  // requested
    double alpha = 0.05;
    double theta_bar = 0.0;
    double quad_form = 0.0;
};

/// Minimum total sample size for target power `pi`, split n_y = ceil(n_raw / (1 + lambda)),
/// n_x = ceil(lambda n_y), then n_y is increased until the realized split reaches `pi`.
SampleSizeResult required_sample_size(double theta_bar, const Matrix& C, const Matrix& D, double lambda,
                                      std::size_t visits, double alpha, double pi);

/// (1/K^4) [sum over distinct cell pairs of G + sum over cells of H].
double power_variance_bracket(const MomentEstimates& me);

/// Plug-in power from a global effect and J' Sigma J. When var_inf is given the
/// delta-method variance phi^2(xi - z) theta^2 T^2 var_inf / (16 y^3) is attached.
PowerResult estimated_power(double theta_bar, double quad_form, double N, std::size_t visits, double alpha,
                            std::optional<double> var_inf = std::nullopt);

/// Estimated power from observed data; at_n replaces the observed N in the display.
PowerResult estimated_power(const TrialData& data, double alpha, std::optional<double> at_n = std::nullopt);

PowerResult estimated_power(const RankSummary& ranks, const PlacementTables& pt, const VarianceComponents& vc,
                            double alpha, std::optional<double> at_n = std::nullopt);

}  // namespace lrst

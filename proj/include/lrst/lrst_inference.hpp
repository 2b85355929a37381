#pragma once

#include <cstddef>

#include "lrst/rank_engine.hpp"
#include "lrst/trial_data.hpp"
#include "lrst/variance_components.hpp"

namespace lrst {

/// One-sided LRST result (alternative: treatment ranks higher).
struct LrstResult {
    double rank_diff = 0.0;  // mean over visits of the rank-difference vector
    double se = 0.0;
    double z = 0.0;
    double p_value = 0.5;
    bool reject = false;
    double alpha = 0.05;
    std::size_t n_x = 0;
    std::size_t n_y = 0;
    std::size_t visits = 0;
    std::size_t outcomes = 0;
    double theta_bar_hat = 0.0;
    double quad_form = 0.0;  // J' Sigma_hat J
};

/// Smallest J' Sigma_hat J accepted before DegenerateVariance is raised.
inline constexpr double min_quad_form = 1e-14;

LrstResult lrst_test(const TrialData& data, double alpha = 0.05);

/// Same computation from precomputed rank and variance summaries.
LrstResult lrst_test(const RankSummary& ranks, const VarianceComponents& vc, std::size_t n_x,
                     std::size_t n_y, double alpha);

}  // namespace lrst

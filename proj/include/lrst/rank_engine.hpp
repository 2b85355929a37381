#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lrst/array3.hpp"
#include "lrst/trial_data.hpp"

namespace lrst {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Mid-ranks: output[i] = #{v < values[i]} + (#{v == values[i]} + 1) / 2.
std::vector<double> midranks(std::span<const double> values);

/// Pooled mid-ranks per (visit, outcome) and the derived rank summaries.
struct RankSummary {
    Array3 rank_x;            // control mid-ranks within the pooled (t, k) column
    Array3 rank_y;            // treatment mid-ranks
    Matrix rank_mean_x;       // T x K, mean control rank per (t, k)
    Matrix rank_mean_y;       // T x K
    Vector rank_diff;         // length T, mean over k of (rank_mean_y - rank_mean_x)
    Matrix theta_hat;         // T x K, (2 / N) (rank_mean_y - rank_mean_x)
    double theta_bar_hat = 0.0;

    std::size_t visits() const noexcept { return static_cast<std::size_t>(theta_hat.rows()); }
    std::size_t outcomes() const noexcept { return static_cast<std::size_t>(theta_hat.cols()); }
};

RankSummary rank_summary(const TrialData& data);

/// theta_hat from the pairwise definition (1 / (n_x n_y)) sum [I(x < y) - I(x > y)];
/// ties contribute 0. O(n_x n_y) per cell.
Matrix theta_hat_pairwise(const TrialData& data);

}  // namespace lrst

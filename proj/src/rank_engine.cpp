#include "lrst/rank_engine.hpp"

#include <algorithm>
#include <numeric>

namespace lrst {

std::vector<double> midranks(std::span<const double> values) {
    const std::size_t m = values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(m);
    std::size_t i = 0;
    while (i < m) {
        std::size_t j = i + 1;
        while (j < m && values[order[j]] == values[order[i]]) ++j;
        // positions i..j-1 hold ranks i+1..j; their average is (i + 1 + j) / 2
        const double r = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t p = i; p < j; ++p) ranks[order[p]] = r;
        i = j;
    }
    return ranks;
}

RankSummary rank_summary(const TrialData& data) {
    const std::size_t nx = data.n_x(), ny = data.n_y(), N = nx + ny;
    const std::size_t T = data.visits(), K = data.outcomes();

    RankSummary rs;
    rs.rank_x = Array3(nx, T, K);
    rs.rank_y = Array3(ny, T, K);
    rs.rank_mean_x = Matrix::Zero(T, K);
    rs.rank_mean_y = Matrix::Zero(T, K);
    rs.theta_hat = Matrix::Zero(T, K);
    rs.rank_diff = Vector::Zero(T);

    std::vector<double> pooled(N);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t i = 0; i < nx; ++i) pooled[i] = data.x(i, t, k);
            for (std::size_t j = 0; j < ny; ++j) pooled[nx + j] = data.y(j, t, k);
            const auto r = midranks(pooled);
            double sx = 0.0, sy = 0.0;
            for (std::size_t i = 0; i < nx; ++i) {
                rs.rank_x(i, t, k) = r[i];
                sx += r[i];
            }
            for (std::size_t j = 0; j < ny; ++j) {
                rs.rank_y(j, t, k) = r[nx + j];
                sy += r[nx + j];
            }
            rs.rank_mean_x(t, k) = sx / static_cast<double>(nx);
            rs.rank_mean_y(t, k) = sy / static_cast<double>(ny);
            rs.theta_hat(t, k) =
                2.0 / static_cast<double>(N) * (rs.rank_mean_y(t, k) - rs.rank_mean_x(t, k));
        }
        double s = 0.0;
        for (std::size_t k = 0; k < K; ++k) s += rs.rank_mean_y(t, k) - rs.rank_mean_x(t, k);
        rs.rank_diff(t) = s / static_cast<double>(K);
    }
    rs.theta_bar_hat = rs.theta_hat.mean();
    return rs;
}

Matrix theta_hat_pairwise(const TrialData& data) {
    const std::size_t T = data.visits(), K = data.outcomes();
    Matrix theta(T, K);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t k = 0; k < K; ++k) {
            long long score = 0;
            for (std::size_t i = 0; i < data.n_x(); ++i)
                for (std::size_t j = 0; j < data.n_y(); ++j) {
                    const double a = data.x(i, t, k), b = data.y(j, t, k);
                    score += (a < b) - (a > b);
                }
            theta(t, k) = static_cast<double>(score) /
                          (static_cast<double>(data.n_x()) * static_cast<double>(data.n_y()));
        }
    return theta;
}

}  // namespace lrst

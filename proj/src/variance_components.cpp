#include "lrst/variance_components.hpp"

#include <cmath>

namespace lrst {

namespace {

// Placement of every element of `own` against `other` using pooled and
// within-arm mid-ranks: (pooled rank - within rank) / |other|.
void fill_placements(const std::vector<double>& own, const std::vector<double>& other,
                     std::vector<double>& out) {
    std::vector<double> pooled(own);
    pooled.insert(pooled.end(), other.begin(), other.end());
    const auto r_pooled = midranks(pooled);
    const auto r_within = midranks(own);
    const double m = static_cast<double>(other.size());
    out.resize(own.size());
    for (std::size_t i = 0; i < own.size(); ++i) out[i] = (r_pooled[i] - r_within[i]) / m;
}

void center(const Array3& a, Array3& out) {
    out = a;
    const std::size_t n = a.subjects();
    for (std::size_t p = 0; p < a.cells(); ++p) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a.at_cell(i, p);
        const double mean = s / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) out.at_cell(i, p) = a.at_cell(i, p) - mean;
    }
}

Matrix covariance_tensor(const Array3& centered) {
    const std::size_t P = centered.cells(), n = centered.subjects();
    Matrix out(P, P);
    for (std::size_t p = 0; p < P; ++p)
        for (std::size_t q = p; q < P; ++q) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += centered.at_cell(i, p) * centered.at_cell(i, q);
            out(p, q) = out(q, p) = s / static_cast<double>(n);
        }
    return out;
}

double cross_moment(const Array3& centered, std::size_t p, std::size_t q) {
    double s = 0.0;
    for (std::size_t i = 0; i < centered.subjects(); ++i) s += centered.at_cell(i, p) * centered.at_cell(i, q);
    return s / static_cast<double>(centered.subjects());
}

void power_moments(const Array3& centered, Matrix& var, Matrix& mu4) {
    const std::size_t T = centered.visits(), K = centered.outcomes(), n = centered.subjects();
    var = Matrix::Zero(T, K);
    mu4 = Matrix::Zero(T, K);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t k = 0; k < K; ++k) {
            double s2 = 0.0, s4 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double e2 = centered(i, t, k) * centered(i, t, k);
                s2 += e2;
                s4 += e2 * e2;
            }
            var(t, k) = s2 / static_cast<double>(n);
            mu4(t, k) = s4 / static_cast<double>(n);
        }
}

}  // namespace

PlacementTables placements(const TrialData& data) {
    const std::size_t T = data.visits(), K = data.outcomes();
    PlacementTables pt;
    pt.u = Array3(data.n_x(), T, K);
    pt.v = Array3(data.n_y(), T, K);
    std::vector<double> out;
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t k = 0; k < K; ++k) {
            const auto xs = data.x.column(t, k);
            const auto ys = data.y.column(t, k);
            fill_placements(xs, ys, out);
            for (std::size_t i = 0; i < xs.size(); ++i) pt.u(i, t, k) = out[i];
            fill_placements(ys, xs, out);
            for (std::size_t j = 0; j < ys.size(); ++j) pt.v(j, t, k) = out[j];
        }
    center(pt.u, pt.u_centered);
    center(pt.v, pt.v_centered);
    return pt;
}

double c_hat(const PlacementTables& pt, std::size_t t1, std::size_t k1, std::size_t t2, std::size_t k2) {
    const std::size_t K = pt.outcomes();
    return cross_moment(pt.u_centered, cell_index(t1, k1, K), cell_index(t2, k2, K));
}

double d_hat(const PlacementTables& pt, std::size_t t1, std::size_t k1, std::size_t t2, std::size_t k2) {
    const std::size_t K = pt.outcomes();
    return cross_moment(pt.v_centered, cell_index(t1, k1, K), cell_index(t2, k2, K));
}

Matrix aggregate_cells(const Matrix& tensor4, std::size_t visits, std::size_t outcomes) {
    const std::size_t T = visits, K = outcomes;
    Matrix out(T, T);
    const double scale = 1.0 / static_cast<double>(K * K);
    for (std::size_t t1 = 0; t1 < T; ++t1)
        for (std::size_t t2 = 0; t2 < T; ++t2) {
            double s = 0.0;
            for (std::size_t k1 = 0; k1 < K; ++k1)
                for (std::size_t k2 = 0; k2 < K; ++k2)
                    s += tensor4(cell_index(t1, k1, K), cell_index(t2, k2, K));
            out(t1, t2) = s * scale;
        }
    return out;
}

Matrix sigma_from_components(const Matrix& c4, const Matrix& d4, double weight_c, double weight_d,
                             std::size_t visits, std::size_t outcomes) {
    const std::size_t T = visits, K = outcomes;
    Matrix out(T, T);
    const double scale = 1.0 / static_cast<double>(K * K);
    for (std::size_t t1 = 0; t1 < T; ++t1)
        for (std::size_t t2 = 0; t2 < T; ++t2) {
            double s = 0.0;
            for (std::size_t k1 = 0; k1 < K; ++k1)
                for (std::size_t k2 = 0; k2 < K; ++k2) {
                    const auto p = cell_index(t1, k1, K), q = cell_index(t2, k2, K);
                    s += weight_c * c4(p, q) + weight_d * d4(p, q);
                }
            out(t1, t2) = s * scale;
        }
    return out;
}

VarianceComponents variance_components(const PlacementTables& pt) {
    const std::size_t nx = pt.u.subjects(), ny = pt.v.subjects();
    const double N = static_cast<double>(nx + ny);
    VarianceComponents vc;
    vc.visits = pt.visits();
    vc.outcomes = pt.outcomes();
    vc.lambda = static_cast<double>(nx) / static_cast<double>(ny);
    vc.weight_c = N / static_cast<double>(nx);
    vc.weight_d = N / static_cast<double>(ny);
    vc.c4 = covariance_tensor(pt.u_centered);
    vc.d4 = covariance_tensor(pt.v_centered);
    vc.C = aggregate_cells(vc.c4, vc.visits, vc.outcomes);
    vc.D = aggregate_cells(vc.d4, vc.visits, vc.outcomes);
    vc.Sigma = sigma_from_components(vc.c4, vc.d4, vc.weight_c, vc.weight_d, vc.visits, vc.outcomes);
    return vc;
}

VarianceComponents variance_components(const TrialData& data) {
    return variance_components(placements(data));
}

MomentEstimates assemble_moments(Matrix var_u, Matrix var_v, Matrix mu4_u, Matrix mu4_v,
                                 const Matrix& c4, const Matrix& d4, double weight_c, double weight_d) {
    MomentEstimates me;
    const auto T = var_u.rows(), K = var_u.cols();
    const auto P = T * K;
    me.K1 = mu4_u - var_u.cwiseProduct(var_u);
    me.K2 = mu4_v - var_v.cwiseProduct(var_v);
    me.H = weight_c * me.K1 + weight_d * me.K2;
    me.L1.resize(P, P);
    me.L2.resize(P, P);
    for (Eigen::Index p = 0; p < P; ++p)
        for (Eigen::Index q = 0; q < P; ++q) {
            const double vu_p = var_u(p / K, p % K), vu_q = var_u(q / K, q % K);
            const double vv_p = var_v(p / K, p % K), vv_q = var_v(q / K, q % K);
            me.L1(p, q) = vu_p * vu_q + c4(p, q) * c4(p, q);
            me.L2(p, q) = vv_p * vv_q + d4(p, q) * d4(p, q);
        }
    me.G = weight_c * me.L1 + weight_d * me.L2;
    me.var_u = std::move(var_u);
    me.var_v = std::move(var_v);
    me.mu4_u = std::move(mu4_u);
    me.mu4_v = std::move(mu4_v);
    return me;
}

MomentEstimates moment_estimates(const PlacementTables& pt, const VarianceComponents& vc) {
    Matrix var_u, var_v, mu4_u, mu4_v;
    power_moments(pt.u_centered, var_u, mu4_u);
    power_moments(pt.v_centered, var_v, mu4_v);
    return assemble_moments(std::move(var_u), std::move(var_v), std::move(mu4_u), std::move(mu4_v),
                            vc.c4, vc.d4, vc.weight_c, vc.weight_d);
}

SeMatrices se_matrices(const MomentEstimates& me, const VarianceComponents& vc, std::size_t n_x,
                       std::size_t n_y) {
    const std::size_t T = vc.visits, K = vc.outcomes;
    const double k4 = static_cast<double>(K * K * K * K);
    SeMatrices out{Matrix(T, T), Matrix(T, T)};
    for (std::size_t t1 = 0; t1 < T; ++t1)
        for (std::size_t t2 = 0; t2 < T; ++t2) {
            double sc = 0.0, sd = 0.0;
            for (std::size_t k1 = 0; k1 < K; ++k1)
                for (std::size_t k2 = 0; k2 < K; ++k2) {
                    const auto p = cell_index(t1, k1, K), q = cell_index(t2, k2, K);
                    if (p == q) {
                        sc += me.K1(t1, k1);
                        sd += me.K2(t1, k1);
                    } else {
                        sc += me.L1(p, q);
                        sd += me.L2(p, q);
                    }
                }
            out.se_c(t1, t2) = std::sqrt(std::max(0.0, sc / k4 / static_cast<double>(n_x)));
            out.se_d(t1, t2) = std::sqrt(std::max(0.0, sd / k4 / static_cast<double>(n_y)));
        }
    return out;
}

}  // namespace lrst

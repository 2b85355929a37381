#pragma once

#include <cstddef>

#include "lrst/array3.hpp"
#include "lrst/rank_engine.hpp"
#include "lrst/trial_data.hpp"

namespace lrst {

/// Empirical placements with ties counted one half:
///   u(i, t, k) = mean_j [I(y_jtk < x_itk) + 1/2 I(y_jtk == x_itk)]
///   v(j, t, k) = mean_i [I(x_itk < y_jtk) + 1/2 I(x_itk == y_jtk)]
/// The centred copies subtract the per-(t, k) arm means, which equal
/// (1 - theta_hat) / 2 and (1 + theta_hat) / 2 under this tie rule.
struct PlacementTables {
    Array3 u;
    Array3 v;
    Array3 u_centered;
    Array3 v_centered;

    std::size_t visits() const noexcept { return u.visits(); }
    std::size_t outcomes() const noexcept { return u.outcomes(); }
};

PlacementTables placements(const TrialData& data);

/// Flattened cell index used by the 4-index tensors: p = t * K + k.
constexpr std::size_t cell_index(std::size_t t, std::size_t k, std::size_t outcomes) noexcept {
    return t * outcomes + k;
}

/// c_hat for one quadruple: (1 / n_x) sum_u uc(u, t1, k1) uc(u, t2, k2).
double c_hat(const PlacementTables& pt, std::size_t t1, std::size_t k1, std::size_t t2, std::size_t k2);
/// d_hat for one quadruple: (1 / n_y) sum_v vc(v, t1, k1) vc(v, t2, k2).
double d_hat(const PlacementTables& pt, std::size_t t1, std::size_t k1, std::size_t t2, std::size_t k2);

/// Covariance components. c4 and d4 are (T K) x (T K) with rows/columns
/// indexed by cell_index; C, D and Sigma are T x T.
struct VarianceComponents {
    Matrix c4;
    Matrix d4;
    Matrix C;
    Matrix D;
    Matrix Sigma;
    double lambda = 1.0;    // n_x / n_y
    double weight_c = 2.0;  // 1 + 1 / lambda
    double weight_d = 2.0;  // 1 + lambda
    std::size_t visits = 0;
    std::size_t outcomes = 0;

    double c(std::size_t t1, std::size_t k1, std::size_t t2, std::size_t k2) const {
        return c4(cell_index(t1, k1, outcomes), cell_index(t2, k2, outcomes));
    }
    double d(std::size_t t1, std::size_t k1, std::size_t t2, std::size_t k2) const {
        return d4(cell_index(t1, k1, outcomes), cell_index(t2, k2, outcomes));
    }
    /// J' Sigma J.
    double quad_form() const { return Sigma.sum(); }
};

/// (1 / K^2) sum over k1, k2 of a (T K) x (T K) tensor, giving T x T.
Matrix aggregate_cells(const Matrix& tensor4, std::size_t visits, std::size_t outcomes);

/// Sigma = aggregate(weight_c * c4 + weight_d * d4), summed termwise.
Matrix sigma_from_components(const Matrix& c4, const Matrix& d4, double weight_c, double weight_d,
                             std::size_t visits, std::size_t outcomes);

VarianceComponents variance_components(const PlacementTables& pt);
VarianceComponents variance_components(const TrialData& data);

/// Plug-in moments of the placement distributions. T x K matrices are
/// indexed (t, k); (T K) x (T K) tensors by cell_index.
struct MomentEstimates {
    Matrix var_u, var_v;   // (1/n) sum centred^2
    Matrix mu4_u, mu4_v;   // (1/n) sum centred^4
    Matrix K1, K2;         // mu4 - var^2
    Matrix L1, L2;         // var(p) var(q) + c(p, q)^2
    Matrix G;              // (1 + 1/lambda) L1 + (1 + lambda) L2
    Matrix H;              // (1 + 1/lambda) K1 + (1 + lambda) K2
};

MomentEstimates moment_estimates(const PlacementTables& pt, const VarianceComponents& vc);

/// Builds K1/K2/L1/L2/G/H from variances, fourth moments and covariance
/// tensors; shared by the plug-in estimator and the population oracle.
MomentEstimates assemble_moments(Matrix var_u, Matrix var_v, Matrix mu4_u, Matrix mu4_v,
                                 const Matrix& c4, const Matrix& d4, double weight_c, double weight_d);

struct SeMatrices {
    Matrix se_c;
    Matrix se_d;
};

/// Asymptotic standard errors of C_hat and D_hat, treating distinct
/// quadruples as independent:
///   se_c(t1, t2) = sqrt((1 / K^4) sum_{k1,k2} v / n_x),
/// v = K1 on the (t1,k1) == (t2,k2) diagonal and L1 elsewhere.
SeMatrices se_matrices(const MomentEstimates& me, const VarianceComponents& vc, std::size_t n_x,
                       std::size_t n_y);

}  // namespace lrst

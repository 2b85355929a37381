#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lrst/rank_engine.hpp"
#include "lrst/variance_components.hpp"

namespace lrst {

/// Two-arm multivariate normal trial design. Means and SDs are T x K
/// (visit rows, outcome columns). The within-subject correlation of the
/// T*K vector (cell index t * K + k) is subject_corr when set, otherwise
/// kron(time_corr, outcome_corr). Both arms share the correlation.
struct GaussianScenario {
    Matrix mu_control;
    Matrix mu_treatment;
    Matrix sd_control;
    Matrix sd_treatment;
    Matrix outcome_corr;
    Matrix time_corr;
    std::optional<Matrix> subject_corr;
    double lambda = 1.0;

    std::size_t visits() const noexcept { return static_cast<std::size_t>(mu_control.rows()); }
    std::size_t outcomes() const noexcept { return static_cast<std::size_t>(mu_control.cols()); }

    /// Shapes, finiteness, SD signs, correlation symmetry and unit diagonals.
    /// Throws invalid_argument.
    void validate() const;

    /// T K x T K within-subject correlation.
    Matrix within_subject_corr() const;

    /// Visits where every outcome has zero SD in both arms and equal means.
    std::vector<std::size_t> degenerate_visits() const;

    /// Copy with degenerate visits removed.
    GaussianScenario pruned() const;

    /// Copy with treatment means set to the control means.
    GaussianScenario null_version() const;
};

/// Default scenario with identity time correlation and 0.5 between outcomes.
GaussianScenario make_scenario(Matrix mu_control, Matrix mu_treatment, Matrix sd_control, Matrix sd_treatment,
                               double lambda = 1.0, double outcome_correlation = 0.5);

/// Two-outcome, seven-visit design with a zero first visit, 2:3 allocation
/// and exchangeable 0.5 correlation across all fourteen coordinates.
GaussianScenario bapi302_scenario();

std::string scenario_to_json(const GaussianScenario& s);
/// Throws parse_error on malformed JSON or missing keys, invalid_argument on bad values.
GaussianScenario scenario_from_json(const std::string& text);
GaussianScenario load_scenario(const std::string& path);
void save_scenario(const GaussianScenario& s, const std::string& path);

/// Factor L with R = L L' via symmetric eigendecomposition; eigenvalues
/// in [-1e-10, 0) are clamped to zero, smaller ones raise NonPSDCorrelation.
Matrix correlation_factor(const Matrix& R);

enum class OracleMethod { monte_carlo, quadrature };

struct OracleConfig {
    OracleMethod method = OracleMethod::monte_carlo;
    std::size_t mc_samples = 1'000'000;
    std::uint64_t seed = 0;
    std::size_t quadrature_nodes = 64;
    std::size_t partitions = 64;  // fixed MC substreams
};

std::string to_string(OracleMethod m);
OracleMethod parse_oracle_method(const std::string& name);

struct ThetaOracle {
    Matrix theta;  // T x K
    double theta_bar = 0.0;
};

/// Closed-form theta_tk = erf(delta / sqrt(2 (sd_x^2 + sd_y^2))) on the pruned scenario.
ThetaOracle oracle_theta(const GaussianScenario& s);

struct OracleResult {
    ThetaOracle theta;
    Matrix c4, d4;        // population placement covariances
    Matrix C, D;          // T x T aggregates
    Matrix c4_se, d4_se;  // MC standard errors (zero for quadrature)
    Matrix C_se, D_se;
    Matrix mu4_u_se, mu4_v_se;
    MomentEstimates moments;
    std::vector<std::size_t> pruned_visits;  // indices removed from the input scenario
    OracleMethod method = OracleMethod::monte_carlo;
    std::size_t samples = 0;
    std::uint64_t seed = 0;

    std::size_t visits() const noexcept { return static_cast<std::size_t>(C.rows()); }
    std::size_t outcomes() const noexcept { return static_cast<std::size_t>(theta.theta.cols()); }
};

/// Population c/d tensors, C, D and placement moments. Works on the pruned scenario.
OracleResult oracle_cd(const GaussianScenario& s, const OracleConfig& cfg = {});

/// Gauss-Hermite rule for E f(Z), Z ~ N(0, 1): nodes and weights summing to one.
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussHermite gauss_hermite_normal(std::size_t n);

}  // namespace lrst

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "lrst/errors.hpp"
#include "lrst/gaussian_oracle.hpp"

namespace lrst {

namespace {

using nlohmann::json;

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from(const json& j, const std::string& key) {
    if (!j.is_array() || j.empty())
        throw Error(ErrorCode::parse_error, "scenario key '" + key + "' must be a non-empty array of rows");
    const auto rows = j.size();
    const auto cols = j.front().is_array() ? j.front().size() : 0;
    if (cols == 0) throw Error(ErrorCode::parse_error, "scenario key '" + key + "' must contain non-empty rows");
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        const auto& row = j[i];
        if (!row.is_array() || row.size() != cols)
            throw Error(ErrorCode::parse_error, "scenario key '" + key + "' is ragged at row " + std::to_string(i + 1));
        for (std::size_t c = 0; c < cols; ++c) {
            if (!row[c].is_number())
                throw Error(ErrorCode::parse_error, "scenario key '" + key + "' has a non-numeric entry");
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[c].get<double>();
        }
    }
    return m;
}

const json& require(const json& j, const std::string& key) {
    const auto it = j.find(key);
    if (it == j.end()) throw Error(ErrorCode::parse_error, "scenario is missing key '" + key + "'");
    return *it;
}

}  // namespace

std::string scenario_to_json(const GaussianScenario& s) {
    json j;
    j["mu_control"] = matrix_json(s.mu_control);
    j["mu_treatment"] = matrix_json(s.mu_treatment);
    j["sd_control"] = matrix_json(s.sd_control);
    j["sd_treatment"] = matrix_json(s.sd_treatment);
    j["outcome_corr"] = matrix_json(s.outcome_corr);
    j["time_corr"] = matrix_json(s.time_corr);
    if (s.subject_corr) j["subject_corr"] = matrix_json(*s.subject_corr);
    j["lambda"] = s.lambda;
    return j.dump(2) + "\n";
}

GaussianScenario scenario_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::parse_error, std::string("scenario JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::parse_error, "scenario JSON must be an object");
    GaussianScenario s;
    s.mu_control = matrix_from(require(j, "mu_control"), "mu_control");
    s.mu_treatment = matrix_from(require(j, "mu_treatment"), "mu_treatment");
    s.sd_control = matrix_from(require(j, "sd_control"), "sd_control");
    s.sd_treatment = matrix_from(require(j, "sd_treatment"), "sd_treatment");
    s.outcome_corr = matrix_from(require(j, "outcome_corr"), "outcome_corr");
    if (j.contains("time_corr") && !j["time_corr"].is_null())
        s.time_corr = matrix_from(j["time_corr"], "time_corr");
    else
        s.time_corr = Matrix::Identity(s.mu_control.rows(), s.mu_control.rows());
    if (j.contains("subject_corr") && !j["subject_corr"].is_null())
        s.subject_corr = matrix_from(j["subject_corr"], "subject_corr");
    const auto& lam = require(j, "lambda");
    if (!lam.is_number()) throw Error(ErrorCode::parse_error, "scenario key 'lambda' must be a number");
    s.lambda = lam.get<double>();
    s.validate();
    return s;
}

GaussianScenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return scenario_from_json(buf.str());
}

void save_scenario(const GaussianScenario& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io_error, "cannot write scenario file '" + path + "'");
    out << scenario_to_json(s);
    if (!out) throw Error(ErrorCode::io_error, "failed writing scenario file '" + path + "'");
}

}  // namespace lrst

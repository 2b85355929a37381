#include "reports.hpp"

#include <sstream>

namespace lrst::cli {

ordered_json to_json(const Matrix& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

ordered_json to_json(const LrstResult& r) {
    return {{"rank_diff", r.rank_diff}, {"se", r.se},
            {"z", r.z},                 {"p_value", r.p_value},
            {"reject", r.reject},       {"alpha", r.alpha},
            {"n_x", r.n_x},             {"n_y", r.n_y},
            {"T", r.visits},            {"K", r.outcomes},
            {"theta_bar_hat", r.theta_bar_hat}, {"quad_form", r.quad_form}};
}

ordered_json to_json(const PowerResult& r) {
    ordered_json j = {{"power", r.power},         {"noncentrality", r.noncentrality},
                      {"theta_bar", r.theta_bar}, {"quad_form", r.quad_form},
                      {"N", r.N},                 {"lambda", r.lambda},
                      {"T", r.visits},            {"alpha", r.alpha}};
    if (r.variance) j["variance"] = *r.variance;
    if (r.se) j["se"] = *r.se;
    if (r.var_inf) j["var_inf"] = *r.var_inf;
    return j;
}

ordered_json to_json(const SampleSizeResult& r) {
    return {{"N_raw", r.n_raw},
            {"N", r.n},
            {"n_x", r.n_x},
            {"n_y", r.n_y},
            {"achieved_power", r.achieved_power},
            {"target_power", r.target_power},
            {"lambda", r.lambda},
            {"alpha", r.alpha},
            {"theta_bar", r.theta_bar},
            {"quad_form", r.quad_form}};
}

ordered_json to_json(const OracleResult& r) {
    ordered_json pruned = ordered_json::array();
    for (auto v : r.pruned_visits) pruned.push_back(v + 1);
    return {{"method", to_string(r.method)},
            {"samples", r.samples},
            {"seed", r.seed},
            {"pruned_visits", pruned},
            {"T", r.visits()},
            {"K", r.outcomes()},
            {"theta", to_json(r.theta.theta)},
            {"theta_bar", r.theta.theta_bar},
            {"C", to_json(r.C)},
            {"D", to_json(r.D)},
            {"C_se", to_json(r.C_se)},
            {"D_se", to_json(r.D_se)},
            {"c4", to_json(r.c4)},
            {"d4", to_json(r.d4)},
            {"c4_se", to_json(r.c4_se)},
            {"d4_se", to_json(r.d4_se)},
            {"var_u", to_json(r.moments.var_u)},
            {"var_v", to_json(r.moments.var_v)},
            {"mu4_u", to_json(r.moments.mu4_u)},
            {"mu4_v", to_json(r.moments.mu4_v)},
            {"mu4_u_se", to_json(r.mu4_u_se)},
            {"mu4_v_se", to_json(r.mu4_v_se)}};
}

ordered_json to_json(const SimReport& r) {
    ordered_json j = {{"replicate_count", r.replicate_count},
                      {"seed", r.seed},
                      {"n_x", r.n_x},
                      {"n_y", r.n_y},
                      {"alpha", r.alpha},
                      {"T", r.visits},
                      {"K", r.outcomes}};
    if (r.power) {
        const auto& p = *r.power;
        j["power"] = {{"rejections", p.rejections},
                      {"empirical_power", p.empirical_power},
                      {"empirical_power_se", p.empirical_power_se},
                      {"mean_estimated_power", p.mean_estimated_power},
                      {"sd_estimated_power", p.sd_estimated_power},
                      {"mean_power_variance", p.mean_power_variance},
                      {"mean_power_se", p.mean_power_se},
                      {"mean_theta_bar_hat", p.mean_theta_bar_hat},
                      {"sd_theta_bar_hat", p.sd_theta_bar_hat},
                      {"mean_z", p.mean_z},
                      {"sd_z", p.sd_z}};
    }
    if (r.accuracy) {
        const auto& a = *r.accuracy;
        j["accuracy"] = {{"mse_C", a.mse_C},
                         {"mae_C", a.mae_C},
                         {"mse_D", a.mse_D},
                         {"mae_D", a.mae_D},
                         {"mean_C", to_json(a.mean_C)},
                         {"mean_D", to_json(a.mean_D)},
                         {"empirical_se_C", to_json(a.empirical_se_C)},
                         {"empirical_se_D", to_json(a.empirical_se_D)},
                         {"plugin_se_C", to_json(a.plugin_se_C)},
                         {"plugin_se_D", to_json(a.plugin_se_D)}};
    }
    return j;
}

ordered_json to_json(const PruneReport& r) {
    ordered_json idx = ordered_json::array();
    for (auto v : r.removed_indices) idx.push_back(v + 1);
    return {{"removed_visits", idx}, {"removed_labels", r.removed_labels}};
}

ordered_json make_report(const std::string& command, ordered_json inputs, ordered_json result) {
    return {{"schema_version", schema_version},
            {"tool", "lrst"},
            {"version", LRST_VERSION},
            {"command", command},
            {"inputs", std::move(inputs)},
            {"result", std::move(result)}};
}

namespace {

void flatten(const ordered_json& j, const std::string& prefix, std::ostringstream& out) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i + 1) + "]", out);
    } else if (j.is_string()) {
        out << prefix << ',' << j.get<std::string>() << '\n';
    } else {
        out << prefix << ',' << j.dump() << '\n';
    }
}

}  // namespace

std::string csv_summary(const ordered_json& report) {
    std::ostringstream out;
    out << "key,value\n";
    flatten(report, "", out);
    return out.str();
}

}  // namespace lrst::cli

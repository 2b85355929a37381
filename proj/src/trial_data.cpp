#include "lrst/trial_data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "lrst/errors.hpp"

namespace lrst {

namespace {

std::vector<std::string> numbered(std::size_t n, const std::string& prefix) {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
    return out;
}

void require_size(const std::vector<std::string>& v, std::size_t n, const char* what) {
    if (v.size() != n)
        throw Error(ErrorCode::invalid_argument,
                    std::string(what) + " has " + std::to_string(v.size()) + " entries, expected " +
                        std::to_string(n));
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// Splits one CSV record; double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_record(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
            was_quoted = true;
        } else if (ch == ',') {
            fields.push_back(was_quoted ? cur : trim(cur));
            cur.clear();
            was_quoted = false;
        } else {
            cur.push_back(ch);
        }
    }
    fields.push_back(was_quoted ? cur : trim(cur));
    return fields;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string row_tag(std::size_t row) { return "row " + std::to_string(row) + ": "; }

std::size_t parse_index(const std::string& s, std::size_t row, const char* what) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v == 0)
        throw Error(ErrorCode::parse_error,
                    row_tag(row) + what + " must be a positive integer, got '" + s + "'");
    return v;
}

double parse_value(const std::string& s, std::size_t row) {
    std::string_view sv = s;
    if (!sv.empty() && sv.front() == '+') sv.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
    if (ptr != sv.data() + sv.size() || sv.empty() ||
        (ec != std::errc() && ec != std::errc::result_out_of_range))
        throw Error(ErrorCode::parse_error, row_tag(row) + "value is not a number: '" + s + "'");
    if (ec == std::errc::result_out_of_range || !std::isfinite(v))
        throw Error(ErrorCode::non_finite_value, row_tag(row) + "value is not finite: '" + s + "'");
    return v;
}

struct SubjectRecord {
    bool treatment = false;
    std::size_t first_row = 0;
    // (visit, outcome) -> (value, row)
    std::map<std::pair<std::size_t, std::size_t>, std::pair<double, std::size_t>> cells;
};

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

bool column_constant(const TrialData& d, std::size_t t, std::size_t k) {
    const double ref = d.x(0, t, k);
    for (std::size_t i = 0; i < d.n_x(); ++i)
        if (d.x(i, t, k) != ref) return false;
    for (std::size_t j = 0; j < d.n_y(); ++j)
        if (d.y(j, t, k) != ref) return false;
    return true;
}

}  // namespace

TrialData make_trial_data(Array3 x, Array3 y, std::vector<std::string> visit_labels,
                          std::vector<std::string> outcome_labels,
                          std::vector<std::string> control_ids,
                          std::vector<std::string> treatment_ids) {
    if (x.visits() != y.visits() || x.outcomes() != y.outcomes())
        throw Error(ErrorCode::invalid_argument, "control and treatment arrays differ in shape");
    if (x.visits() < 1 || x.outcomes() < 1)
        throw Error(ErrorCode::invalid_argument, "need at least one visit and one outcome");
    if (x.subjects() < 2 || y.subjects() < 2)
        throw Error(ErrorCode::invalid_argument, "each arm needs at least two subjects (n_x=" +
                                                     std::to_string(x.subjects()) + ", n_y=" +
                                                     std::to_string(y.subjects()) + ")");
    for (double v : x.flat())
        if (!std::isfinite(v)) throw Error(ErrorCode::non_finite_value, "control array has a non-finite value");
    for (double v : y.flat())
        if (!std::isfinite(v)) throw Error(ErrorCode::non_finite_value, "treatment array has a non-finite value");

    if (visit_labels.empty()) visit_labels = numbered(x.visits(), "");
    if (outcome_labels.empty()) outcome_labels = numbered(x.outcomes(), "");
    if (control_ids.empty()) control_ids = numbered(x.subjects(), "c");
    if (treatment_ids.empty()) treatment_ids = numbered(y.subjects(), "t");
    require_size(visit_labels, x.visits(), "visit_labels");
    require_size(outcome_labels, x.outcomes(), "outcome_labels");
    require_size(control_ids, x.subjects(), "control_ids");
    require_size(treatment_ids, y.subjects(), "treatment_ids");

    TrialData d;
    d.x = std::move(x);
    d.y = std::move(y);
    d.visit_labels = std::move(visit_labels);
    d.outcome_labels = std::move(outcome_labels);
    d.control_ids = std::move(control_ids);
    d.treatment_ids = std::move(treatment_ids);
    return d;
}

TrialData parse_trial_csv(std::istream& source, const ColumnMapping& schema) {
    std::string line;
    std::size_t row = 1;
    if (!std::getline(source, line)) throw Error(ErrorCode::parse_error, "empty input: missing header");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = split_record(line);
    auto locate = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw Error(ErrorCode::parse_error, "header lacks column '" + name + "'");
        if (std::find(it + 1, header.end(), name) != header.end())
            throw Error(ErrorCode::parse_error, "header repeats column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t c_id = locate(schema.subject_id);
    const std::size_t c_arm = locate(schema.arm);
    const std::size_t c_visit = locate(schema.visit);
    const std::size_t c_outcome = locate(schema.outcome);
    const std::size_t c_value = locate(schema.value);

    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::string> order;
    std::vector<SubjectRecord> subjects;
    std::size_t max_visit = 0, max_outcome = 0;

    while (std::getline(source, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto f = split_record(line);
        if (f.size() != header.size())
            throw Error(ErrorCode::parse_error, row_tag(row) + "expected " + std::to_string(header.size()) +
                                                    " fields, found " + std::to_string(f.size()));
        const std::string& id = f[c_id];
        if (id.empty()) throw Error(ErrorCode::parse_error, row_tag(row) + "empty subject_id");
        const std::string arm = lower(f[c_arm]);
        bool treatment;
        if (arm == "control") treatment = false;
        else if (arm == "treatment") treatment = true;
        else throw Error(ErrorCode::unknown_arm, row_tag(row) + "unknown arm '" + f[c_arm] + "'");
        const std::size_t visit = parse_index(f[c_visit], row, "visit");
        const std::size_t outcome = parse_index(f[c_outcome], row, "outcome");
        const double value = parse_value(f[c_value], row);

        auto [it, inserted] = index.try_emplace(id, subjects.size());
        if (inserted) {
            order.push_back(id);
            subjects.push_back({treatment, row, {}});
        }
        SubjectRecord& rec = subjects[it->second];
        if (rec.treatment != treatment)
            throw Error(ErrorCode::unknown_arm, row_tag(row) + "subject '" + id + "' appears in both arms");
        auto [cell, fresh] = rec.cells.try_emplace({visit, outcome}, value, row);
        if (!fresh)
            throw Error(ErrorCode::duplicate_cell,
                        row_tag(row) + "subject '" + id + "' repeats visit " + std::to_string(visit) +
                            ", outcome " + std::to_string(outcome) + " (first at row " +
                            std::to_string(cell->second.second) + ")");
        max_visit = std::max(max_visit, visit);
        max_outcome = std::max(max_outcome, outcome);
    }
    if (subjects.empty()) throw Error(ErrorCode::parse_error, "no data rows");

    std::size_t nx = 0, ny = 0;
    for (const auto& s : subjects) (s.treatment ? ny : nx) += 1;
    Array3 x(nx, max_visit, max_outcome), y(ny, max_visit, max_outcome);
    std::vector<std::string> xid, yid;
    for (std::size_t s = 0; s < subjects.size(); ++s) {
        const auto& rec = subjects[s];
        Array3& arr = rec.treatment ? y : x;
        auto& ids = rec.treatment ? yid : xid;
        const std::size_t i = ids.size();
        ids.push_back(order[s]);
        for (std::size_t t = 1; t <= max_visit; ++t)
            for (std::size_t k = 1; k <= max_outcome; ++k) {
                auto it = rec.cells.find({t, k});
                if (it == rec.cells.end())
                    throw Error(ErrorCode::missing_cell,
                                row_tag(rec.first_row) + "subject '" + order[s] + "' has no value for visit " +
                                    std::to_string(t) + ", outcome " + std::to_string(k));
                arr(i, t - 1, k - 1) = it->second.first;
            }
    }
    return make_trial_data(std::move(x), std::move(y), {}, {}, std::move(xid), std::move(yid));
}

TrialData parse_trial_csv_file(const std::string& path, const ColumnMapping& schema) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open data file '" + path + "'");
    return parse_trial_csv(in, schema);
}

void write_trial_csv(std::ostream& out, const TrialData& d) {
    out << "subject_id,arm,visit,outcome,value\n";
    auto emit = [&](const Array3& a, const std::vector<std::string>& ids, const char* arm) {
        for (std::size_t i = 0; i < a.subjects(); ++i)
            for (std::size_t t = 0; t < a.visits(); ++t)
                for (std::size_t k = 0; k < a.outcomes(); ++k)
                    out << ids[i] << ',' << arm << ',' << (t + 1) << ',' << (k + 1) << ','
                        << format_double(a(i, t, k)) << '\n';
    };
    emit(d.x, d.control_ids, "control");
    emit(d.y, d.treatment_ids, "treatment");
}

std::string to_csv(const TrialData& data) {
    std::ostringstream os;
    write_trial_csv(os, data);
    return os.str();
}

std::pair<TrialData, PruneReport> validate_and_prune(const TrialData& data) {
    const std::size_t T = data.visits(), K = data.outcomes();
    PruneReport report;
    std::vector<std::size_t> keep;
    for (std::size_t t = 0; t < T; ++t) {
        bool degenerate = true;
        for (std::size_t k = 0; k < K && degenerate; ++k) degenerate = column_constant(data, t, k);
        if (degenerate) {
            report.removed_indices.push_back(t);
            report.removed_labels.push_back(data.visit_labels[t]);
        } else {
            keep.push_back(t);
        }
    }
    if (keep.empty())
        throw Error(ErrorCode::all_visits_degenerate, "every visit is constant in both arms; nothing to test");
    if (report.empty()) return {data, report};

    auto select = [&](const Array3& a) {
        Array3 out(a.subjects(), keep.size(), K);
        for (std::size_t i = 0; i < a.subjects(); ++i)
            for (std::size_t s = 0; s < keep.size(); ++s)
                for (std::size_t k = 0; k < K; ++k) out(i, s, k) = a(i, keep[s], k);
        return out;
    };
    std::vector<std::string> labels;
    for (std::size_t t : keep) labels.push_back(data.visit_labels[t]);
    TrialData pruned = make_trial_data(select(data.x), select(data.y), std::move(labels),
                                       data.outcome_labels, data.control_ids, data.treatment_ids);
    return {std::move(pruned), std::move(report)};
}

}  // namespace lrst

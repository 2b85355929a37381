#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lrst/array3.hpp"

namespace lrst {

/// Two-arm multivariate longitudinal trial: change-from-baseline values for
/// control (x) and treatment (y), indexed (subject, visit, outcome).
/// Construct through make_trial_data or parse_trial_csv; both enforce the
/// invariants (>= 2 subjects per arm, finite values, matching shapes).
struct TrialData {
    Array3 x;
    Array3 y;
    std::vector<std::string> visit_labels;
    std::vector<std::string> outcome_labels;
    std::vector<std::string> control_ids;
    std::vector<std::string> treatment_ids;

    std::size_t n_x() const noexcept { return x.subjects(); }
    std::size_t n_y() const noexcept { return y.subjects(); }
    std::size_t total() const noexcept { return n_x() + n_y(); }
    std::size_t visits() const noexcept { return x.visits(); }
    std::size_t outcomes() const noexcept { return x.outcomes(); }
    /// Allocation ratio n_x / n_y.
    double lambda() const noexcept {
        return static_cast<double>(n_x()) / static_cast<double>(n_y());
    }

    friend bool operator==(const TrialData&, const TrialData&) = default;
};

/// Validates shapes and values; fills default labels ("1".."T", "1".."K",
/// "c1".., "t1..") for any label vector left empty.
TrialData make_trial_data(Array3 x, Array3 y, std::vector<std::string> visit_labels = {},
                          std::vector<std::string> outcome_labels = {},
                          std::vector<std::string> control_ids = {},
                          std::vector<std::string> treatment_ids = {});

/// Header names for the five required CSV columns.
struct ColumnMapping {
    std::string subject_id = "subject_id";
    std::string arm = "arm";
    std::string visit = "visit";
    std::string outcome = "outcome";
    std::string value = "value";
};

/// Reads long-format CSV (one row per subject/visit/outcome). Column order is
/// free; visit and outcome are 1-based integers; arm is "control" or
/// "treatment" (case-insensitive). Subjects keep first-appearance order
/// within their arm.
TrialData parse_trial_csv(std::istream& source, const ColumnMapping& schema = {});
TrialData parse_trial_csv_file(const std::string& path, const ColumnMapping& schema = {});

/// Writes the canonical long format; values use shortest round-trip form so
/// parse(write(d)) reproduces the arrays bitwise.
void write_trial_csv(std::ostream& out, const TrialData& data);
std::string to_csv(const TrialData& data);

struct PruneReport {
    std::vector<std::size_t> removed_indices;  // 0-based positions in the input
    std::vector<std::string> removed_labels;

    bool empty() const noexcept { return removed_indices.empty(); }
};

/// Drops every visit at which each pooled (t, k) column is constant across
/// both arms. Surviving visits keep their order and labels.
/// Throws AllVisitsDegenerate when nothing is left.
std::pair<TrialData, PruneReport> validate_and_prune(const TrialData& data);

}  // namespace lrst

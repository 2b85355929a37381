#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lrst {

/// Dense (subject, visit, outcome) array, subject-major then visit then outcome.
/// A pooled (t, k) column is the strided slice starting at t * outcomes + k.
class Array3 {
public:
    Array3() = default;
    Array3(std::size_t subjects, std::size_t visits, std::size_t outcomes, double fill = 0.0)
        : subjects_(subjects), visits_(visits), outcomes_(outcomes),
          data_(subjects * visits * outcomes, fill) {}

    std::size_t subjects() const noexcept { return subjects_; }
    std::size_t visits() const noexcept { return visits_; }
    std::size_t outcomes() const noexcept { return outcomes_; }
    std::size_t cells() const noexcept { return visits_ * outcomes_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t i, std::size_t t, std::size_t k) noexcept {
        return data_[(i * visits_ + t) * outcomes_ + k];
    }
    double operator()(std::size_t i, std::size_t t, std::size_t k) const noexcept {
        return data_[(i * visits_ + t) * outcomes_ + k];
    }

    /// Element i of flattened cell index p = t * outcomes + k.
    double& at_cell(std::size_t i, std::size_t p) noexcept { return data_[i * cells() + p]; }
    double at_cell(std::size_t i, std::size_t p) const noexcept { return data_[i * cells() + p]; }

    /// The visits * outcomes record of one subject.
    std::span<double> subject(std::size_t i) noexcept { return {data_.data() + i * cells(), cells()}; }
    std::span<const double> subject(std::size_t i) const noexcept {
        return {data_.data() + i * cells(), cells()};
    }

    /// Copy of the (t, k) column across subjects.
    std::vector<double> column(std::size_t t, std::size_t k) const;

    std::span<const double> flat() const noexcept { return data_; }
    std::span<double> flat() noexcept { return data_; }

    friend bool operator==(const Array3&, const Array3&) = default;

private:
    std::size_t subjects_ = 0;
    std::size_t visits_ = 0;
    std::size_t outcomes_ = 0;
    std::vector<double> data_;
};

inline std::vector<double> Array3::column(std::size_t t, std::size_t k) const {
    std::vector<double> out(subjects_);
    for (std::size_t i = 0; i < subjects_; ++i) out[i] = (*this)(i, t, k);
    return out;
}

}  // namespace lrst

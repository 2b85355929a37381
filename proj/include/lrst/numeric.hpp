#pragma once

// Standard normal distribution helpers shared by inference and design code.

namespace lrst::numeric {

inline constexpr double pi = 3.14159265358979323846;

/// Phi(x), computed through erfc so the upper tail keeps full relative accuracy.
double normal_cdf(double x) noexcept;

/// 1 - Phi(x).
double normal_sf(double x) noexcept;

double normal_pdf(double x) noexcept;

/// Phi^{-1}(p) for p in (0, 1); returns -inf/+inf at 0/1 and NaN outside.
/// Wichura's AS241 (PPND16), relative accuracy about 1e-16.
double normal_quantile(double p) noexcept;

/// Upper critical value z_alpha = Phi^{-1}(1 - alpha).
double upper_critical(double alpha) noexcept;

}  // namespace lrst::numeric

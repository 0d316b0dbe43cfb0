#pragma once

// Heavy-tail robust mean estimation: every sample is rescaled by s, passed
// through the bounded soft truncation phi, perturbed by multiplicative
// Gaussian noise of variance 1/tau, and the noise is integrated out in closed
// form. Applied coordinate-wise to per-sample loss gradients this gives the
// local gradient estimate each honest device uploads.

#include <cstddef>
#include <span>

#include "bhfl/losses.hpp"
#include "bhfl/types.hpp"

namespace bhfl {

/// Parameters of the scalar estimator. `log_inv_zeta` carries log(1/zeta)
/// so that confidence levels far below the double range stay representable;
/// `zeta()` may underflow to 0.
struct EstimatorParams {
    double log_inv_zeta = 0.0;
    double s = 1.0;
    double tau = 1.0;
    double v = 1.0;

    [[nodiscard]] double zeta() const;
    /// Throws InvalidConfig unless all fields are finite and positive.
    void validate() const;

    /// s = sqrt(n v / (2 log(1/zeta))), tau = sqrt(2 log(1/zeta)).
    static EstimatorParams from_log_inv_zeta(double log_inv_zeta, std::size_t n, double v);
    static EstimatorParams from_zeta(double zeta, std::size_t n, double v);
    /// Direct override of the scale and noise precision.
    static EstimatorParams manual(double s, double tau, double v = 1.0);
};

enum class Variant { Bhgd, BhgdC };

inline constexpr double kSqrt2 = 1.41421356237309504880;
/// sup |phi| = 2 sqrt(2) / 3.
inline constexpr double kPhiBound = 0.94280904158206336587;

/// Soft truncation: x - x^3/6 on [-sqrt 2, sqrt 2], saturating at +-2sqrt(2)/3.
double phi(double x) noexcept;

/// Standard normal CDF via erfc.
double normal_cdf(double x) noexcept;

/// C(a, |b|) such that smoothed_phi(a, b) = a(1 - b^2/2) - a^3/6 + C(a, |b|).
/// At b_abs = 0 returns the analytic limit phi(a) - (a - a^3/6).
double correction(double a, double b_abs) noexcept;

/// E[phi(a + b u)] for u ~ N(0, 1).
///
/// Uses the closed form when the polynomial part is moderate. For large
/// |a| or |b| the closed form cancels catastrophically, so the expectation is
/// assembled from the saturated tails and a Gauss-Legendre integral over
/// the cubic segment instead.
double smoothed_phi(double a, double b) noexcept;

namespace detail {
double smoothed_phi_closed_form(double a, double b) noexcept;
double smoothed_phi_by_parts(double a, double b) noexcept;
}  // namespace detail

/// (s/n) sum_j smoothed_phi(x_j/s, |x_j|/(s sqrt tau)). Throws EmptyInput.
double robust_scalar_mean(std::span<const double> samples, const EstimatorParams& params);

/// Coordinate-wise robust mean of the per-sample gradients over `data`.
ParamVector robust_gradient(const LossModel& model, ConstVec w, const Dataset& data,
                            const EstimatorParams& params);

/// Theory schedule for zeta:
///   BHGD:   zeta = 1 / ((Delta n Lhat)^d (m+1) d (mn)^d)
///   BHGD-C: zeta = 1 / (2 (Delta sqrt(mn))^d d (mn)^d)
/// evaluated in log space. Throws InvalidConfig on non-positive input.
EstimatorParams default_params(std::size_t n, std::size_t m, std::size_t d, double v, double diameter,
                               double lipschitz, Variant variant);

/// Lipschitz constant (in l1 / n) of the estimator in its samples:
/// 1 - 2 Phi(-sqrt tau) + sqrt(2 / (tau pi)) exp(-tau / 2).
double continuity_constant(double tau) noexcept;

}  // namespace bhfl

#include "bhfl/robust_estimator.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "bhfl/error.hpp"

namespace bhfl {
namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Above this magnitude of a(1 - b^2/2) - a^3/6 the closed form loses more
// than ~1e-13 absolute to cancellation between its polynomial part and C.
constexpr double kClosedFormLimit = 1.0e3;

double polynomial_part(double a, double b) noexcept { return a * (1.0 - 0.5 * b * b) - a * a * a / 6.0; }

// V * exp(-V^2/2) and V^2 * exp(-V^2/2) with 0 * inf resolved to 0.
double v_times(double v, double e) noexcept { return e == 0.0 ? 0.0 : v * e; }

double finish(double acc, double s, std::size_t n) { return s * acc / static_cast<double>(n); }

}  // namespace

double EstimatorParams::zeta() const { return std::exp(-log_inv_zeta); }

void EstimatorParams::validate() const {
    const auto ok = [](double x) { return std::isfinite(x) && x > 0.0; };
    require(ok(log_inv_zeta), ErrorKind::InvalidConfig, "estimator log(1/zeta) must be finite and > 0");
    require(ok(s), ErrorKind::InvalidConfig, "estimator scale s must be finite and > 0");
    require(ok(tau), ErrorKind::InvalidConfig, "estimator tau must be finite and > 0");
    require(ok(v), ErrorKind::InvalidConfig, "moment bound v must be finite and > 0");
}

EstimatorParams EstimatorParams::from_log_inv_zeta(double log_inv_zeta, std::size_t n, double v) {
    require(n >= 1, ErrorKind::InvalidConfig, "sample count must be >= 1");
    require(std::isfinite(log_inv_zeta) && log_inv_zeta > 0.0, ErrorKind::InvalidConfig,
            "zeta must lie in (0, 1)");
    require(std::isfinite(v) && v > 0.0, ErrorKind::InvalidConfig, "moment bound v must be > 0");
    EstimatorParams p;
    p.log_inv_zeta = log_inv_zeta;
    p.v = v;
    p.s = std::sqrt(static_cast<double>(n) * v / (2.0 * log_inv_zeta));
    p.tau = std::sqrt(2.0 * log_inv_zeta);
    return p;
}

EstimatorParams EstimatorParams::from_zeta(double zeta, std::size_t n, double v) {
    require(zeta > 0.0 && zeta < 1.0, ErrorKind::InvalidConfig, "zeta must lie in (0, 1)");
    return from_log_inv_zeta(-std::log(zeta), n, v);
}

EstimatorParams EstimatorParams::manual(double s, double tau, double v) {
    EstimatorParams p;
    p.s = s;
    p.tau = tau;
    p.v = v;
    // tau = sqrt(2 log(1/zeta)) for the schedule; keep the same relation.
    p.log_inv_zeta = 0.5 * tau * tau;
    p.validate();
    return p;
}

double phi(double x) noexcept {
    if (x > kSqrt2) return kPhiBound;
    if (x < -kSqrt2) return -kPhiBound;
    return x - x * x * x / 6.0;
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x * (1.0 / kSqrt2)); }

double correction(double a, double b_abs) noexcept {
    if (b_abs == 0.0) return phi(a) - (a - a * a * a / 6.0);

    const double b = b_abs;
    const double v_minus = (kSqrt2 - a) / b;
    const double v_plus = (kSqrt2 + a) / b;
    const double f_minus = normal_cdf(-v_minus);
    const double f_plus = normal_cdf(-v_plus);
    const double e_minus = std::exp(-0.5 * v_minus * v_minus);
    const double e_plus = std::exp(-0.5 * v_plus * v_plus);

    const double t1 = kPhiBound * (f_minus - f_plus);
    const double t2 = -(a - a * a * a / 6.0) * (f_minus + f_plus);
    const double t3 = b * kInvSqrt2Pi * (1.0 - 0.5 * a * a) * (e_plus - e_minus);
    const double t4 =
        0.5 * a * b * b * (f_plus + f_minus + kInvSqrt2Pi * (v_times(v_plus, e_plus) + v_times(v_minus, e_minus)));
    const double t5 = b * b * b / 6.0 * kInvSqrt2Pi *
                      ((2.0 * e_minus + v_times(v_minus, v_times(v_minus, e_minus))) -
                       (2.0 * e_plus + v_times(v_plus, v_times(v_plus, e_plus))));
    return t1 + t2 + t3 + t4 + t5;
}

namespace detail {

double smoothed_phi_closed_form(double a, double b) noexcept {
    return polynomial_part(a, b) + correction(a, std::fabs(b));
}

double smoothed_phi_by_parts(double a, double b) noexcept {
    const double sd = std::fabs(b);
    if (sd == 0.0) return phi(a);
    // Saturated tails contribute +-2sqrt(2)/3 times their probability mass.
    const double upper = normal_cdf((a - kSqrt2) / sd);
    const double lower = normal_cdf((-kSqrt2 - a) / sd);
    const auto cubic_times_density = [a, sd](double x) {
        const double z = (x - a) / sd;
        return (x - x * x * x / 6.0) * kInvSqrt2Pi / sd * std::exp(-0.5 * z * z);
    };
    // Beyond 12 sd the density is below 1e-31; panels no wider than sd keep
    // the 40-point rule accurate for narrow densities.
    const double lo = std::max(-kSqrt2, a - 12.0 * sd);
    const double hi = std::min(kSqrt2, a + 12.0 * sd);
    double middle = 0.0;
    if (hi > lo) {
        const double panels = std::min(64.0, std::ceil((hi - lo) / sd));
        const double width = (hi - lo) / panels;
        for (int i = 0; i < static_cast<int>(panels); ++i) {
            const double left = lo + width * i;
            middle += boost::math::quadrature::gauss<double, 40>::integrate(cubic_times_density, left, left + width);
        }
    }
    return kPhiBound * (upper - lower) + middle;
}

}  // namespace detail

double smoothed_phi(double a, double b) noexcept {
    const double magnitude = std::fabs(a) * (1.0 + 0.5 * b * b) + std::fabs(a * a * a) / 6.0;
    if (magnitude <= kClosedFormLimit) return detail::smoothed_phi_closed_form(a, b);
    return detail::smoothed_phi_by_parts(a, b);
}

double robust_scalar_mean(std::span<const double> samples, const EstimatorParams& params) {
    require(!samples.empty(), ErrorKind::EmptyInput, "robust mean of an empty sample");
    const double s = params.s;
    const double noise = s * std::sqrt(params.tau);
    double acc = 0.0;
    for (const double x : samples) acc += smoothed_phi(x / s, std::fabs(x) / noise);
    return finish(acc, s, samples.size());
}

ParamVector robust_gradient(const LossModel& model, ConstVec w, const Dataset& data,
                            const EstimatorParams& params) {
    require(!data.empty(), ErrorKind::EmptyInput, "robust gradient over an empty dataset");
    require(w.size() == model.dim(), ErrorKind::DimensionMismatch,
            "parameter has dimension " + std::to_string(w.size()) + ", model expects " +
                std::to_string(model.dim()));
    const double s = params.s;
    const double noise = s * std::sqrt(params.tau);
    ParamVector acc(model.dim(), 0.0);
    ParamVector grad(model.dim(), 0.0);
    for (const auto& z : data.samples) {
        per_sample_gradient(model, w, z, grad);
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += smoothed_phi(grad[k] / s, std::fabs(grad[k]) / noise);
    }
    for (auto& value : acc) value = finish(value, s, data.size());
    return acc;
}

EstimatorParams default_params(std::size_t n, std::size_t m, std::size_t d, double v, double diameter,
                               double lipschitz, Variant variant) {
    require(n >= 1 && m >= 1 && d >= 1, ErrorKind::InvalidConfig, "n, m and d must be positive");
    require(v > 0.0 && diameter > 0.0 && lipschitz > 0.0, ErrorKind::InvalidConfig,
            "v, diameter and Lipschitz constant must be positive");
    const double nd = static_cast<double>(n);
    const double md = static_cast<double>(m);
    const double dd = static_cast<double>(d);
    const double log_mn = std::log(md * nd);
    double log_inv_zeta = 0.0;
    if (variant == Variant::Bhgd) {
        log_inv_zeta = dd * std::log(diameter * nd * lipschitz) + std::log((md + 1.0) * dd) + dd * log_mn;
    } else {
        log_inv_zeta = std::numbers::ln2 + dd * (std::log(diameter) + 0.5 * log_mn) + std::log(dd) + dd * log_mn;
    }
    return EstimatorParams::from_log_inv_zeta(log_inv_zeta, n, v);
}

double continuity_constant(double tau) noexcept {
    const double root = std::sqrt(tau);
    return 1.0 - 2.0 * normal_cdf(-root) + std::sqrt(2.0 / (tau * std::numbers::pi)) * std::exp(-0.5 * tau);
}

}  // namespace bhfl

#pragma once

// Evaluation of L(s, f) for a weight k + 1/2 cusp form on Gamma0(4) that is a Fricke
// eigenform: direct Dirichlet sums, the completed function xi(s) = pi^{-s} Gamma(s) L(s)
// through an incomplete-gamma expansion, and the smoothed approximate functional
// equation split into its six terms J1..J6.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "hiwl/dirichlet.hpp"
#include "hiwl/error.hpp"
#include "hiwl/power_series.hpp"
#include "hiwl/special.hpp"

namespace hiwl {

struct EvalConfig {
    double x = 0.0;  ///< AFE cut point; 0 selects max(10, |t|)
    int h = 1;       ///< smoothing order, 1 or 2
    double eta = 0.75;
    double alpha = std::numeric_limits<double>::quiet_NaN();  ///< NaN selects (k/2 + 1/4) / 2
    double quad_step = 0.25;
    double target_eps = 1e-9;
    double t_small = 5.0;
    /// Phase budget delta * |t| of the rotated incomplete-gamma expansion; the expansion
    /// loses about exp(xi_rotation) in relative accuracy and needs ~ (xi_rotation + 45) |t| /
    /// (pi xi_rotation) terms.
    double xi_rotation = 8.0;
    /// Integrate the AFE line integrals only over |Im w| <= log^2 |t|. Otherwise the range is
    /// widened until the Gamma(w/h) decay reaches target_eps.
    bool strict_truncation = false;
};

enum class NormalizationStatus { unchecked, passed, failed };

struct FormDescriptor {
    std::string id;
    int k = 0;
    int ell = 0;  ///< Fricke eigenvalue (-1)^ell
    CoefficientTable coeffs;
    bool real_coeffs = true;
    TailBound tail;
    NormalizationStatus normalization = NormalizationStatus::unchecked;
    double normalization_residual = std::numeric_limits<double>::quiet_NaN();

    double weight() const noexcept { return k + 0.5; }
    double critical_line() const noexcept { return k / 2.0 + 0.25; }
    double abs_convergence() const noexcept { return k / 2.0 + 0.75; }
    double fricke_sign() const noexcept { return ell == 0 ? 1.0 : -1.0; }
    std::size_t size() const noexcept { return coeffs.size(); }
};

namespace detail {

inline constexpr double pi = std::numbers::pi;

struct RotationPlan {
    double phi;        // rotation angle of the split point
    std::size_t terms; // number of coefficients used
};

inline RotationPlan rotation_plan(double t, double budget) {
    const double at = std::abs(t);
    const double delta = at * (pi / 2.0) > budget ? budget / at : pi / 2.0;
    const double phi = (t >= 0.0 ? 1.0 : -1.0) * (pi / 2.0 - delta);
    const double decay = pi * std::sin(delta);
    const auto terms = static_cast<std::size_t>(std::ceil((delta * at + 45.0) / decay)) + 5;
    return {phi, terms};
}

/// xi(s) * exp(pi |t| / 2).
///
/// Splitting the Mellin transform of f(iy/2) at the Fricke fixed point y = 1 along the ray
/// arg y = phi gives
///   xi(s) = sum_n a(n) [ (pi n)^{-s} Gamma(s, pi n e^{i phi})
///                        + (-1)^ell (pi n)^{s-k-1/2} Gamma(k+1/2-s, pi n e^{-i phi}) ].
/// Rotating phi towards sign(t) pi/2 keeps the individual terms within a fixed factor of
/// xi(s) instead of e^{pi |t| / 2} times larger.
inline cplx xi_scaled_raw(const FormDescriptor& f, cplx s, double budget) {
    const double t = s.imag();
    const auto plan = rotation_plan(t, budget);
    if (plan.terms > f.size())
        throw convergence_error("xi: coefficient table too short to certify the tail at t = " +
                                std::to_string(t));
    const double log_scale = pi * std::abs(t) / 2.0;
    const cplx rot = std::polar(1.0, plan.phi);
    const cplx dual = f.weight() - s;
    const double sign = f.fricke_sign();
    cplx sum = 0.0;
    for (std::size_t n = 1; n <= plan.terms; ++n) {
        const cplx an = f.coeffs(n);
        if (an == cplx(0.0)) continue;
        const double x = pi * static_cast<double>(n);
        const double lx = std::log(x);
        const cplx first = upper_incomplete_gamma_scaled(s, x * rot, log_scale - s * lx);
        const cplx second = upper_incomplete_gamma_scaled(dual, x * std::conj(rot), log_scale - dual * lx);
        sum += an * (first + sign * second);
    }
    return sum;
}

/// L(s) = xi(s) pi^s / Gamma(s) from a scaled xi value.
inline cplx l_from_scaled_xi(cplx scaled, cplx s) {
    if (is_nonpositive_integer(s)) return 0.0;
    const double at = std::abs(s.imag());
    const double log_scale = pi * at / 2.0;
    const cplx lpi = s * std::log(pi);
    if (s.real() >= 0.5) return scaled * std::exp(lpi - log_gamma(s) - log_scale);
    // 1/Gamma(s) = sin(pi s) Gamma(1-s) / pi, with sin(pi s) e^{-pi |t|} formed without overflow
    const cplx I(0.0, 1.0);
    const double sr = s.real();
    cplx sin_scaled;
    if (s.imag() >= 0.0)
        sin_scaled = (std::exp(I * (pi * sr)) * std::exp(-2.0 * pi * at) - std::exp(-I * (pi * sr))) / (2.0 * I);
    else
        sin_scaled = (std::exp(I * (pi * sr)) - std::exp(-I * (pi * sr)) * std::exp(-2.0 * pi * at)) / (2.0 * I);
    return scaled * sin_scaled / pi * std::exp(lpi - log_scale + pi * at + log_gamma(1.0 - s));
}

} // namespace detail

/// True when the direct sum at abscissa sigma has a certified tail below eps.
inline bool direct_certified(const FormDescriptor& f, double sigma, double eps) {
    return sigma >= f.abs_convergence() + 0.25 && f.tail.sum_bound(sigma) <= eps;
}

/// sum_{n <= N} a(n) n^{-s}, accepted only when the fitted tail bound is below eps.
inline cplx l_direct(const FormDescriptor& f, cplx s, double eps = 1e-9) {
    if (s.real() < f.abs_convergence() + 0.25)
        throw domain_error("l_direct: Re(s) = " + std::to_string(s.real()) + " below k/2 + 1");
    if (f.tail.sum_bound(s.real()) > eps)
        throw convergence_error("l_direct: table of length " + std::to_string(f.size()) +
                                " too short for the requested accuracy at Re(s) = " + std::to_string(s.real()));
    return partial_sum(f.coeffs, s, static_cast<double>(f.size()));
}

/// Scaled completed L-function: value() = scaled * exp(-log_scale).
struct XiValue {
    cplx scaled;
    double log_scale;
    cplx value() const { return scaled * std::exp(-log_scale); }
};

inline XiValue xi_scaled(const FormDescriptor& f, cplx s, const EvalConfig& cfg = {}) {
    if (f.normalization != NormalizationStatus::passed)
        throw domain_error("xi: normalization self-test of form '" + f.id + "' has not passed");
    return {detail::xi_scaled_raw(f, s, cfg.xi_rotation), detail::pi * std::abs(s.imag()) / 2.0};
}

/// xi(s) = pi^{-s} Gamma(s) L(s); underflows for |t| beyond ~450.
inline cplx xi_completed(const FormDescriptor& f, cplx s, const EvalConfig& cfg = {}) {
    return xi_scaled(f, s, cfg).value();
}

/// L(s) through the completed function; valid in the whole plane.
inline cplx l_via_xi(const FormDescriptor& f, cplx s, const EvalConfig& cfg = {}) {
    return detail::l_from_scaled_xi(xi_scaled(f, s, cfg).scaled, s);
}

/// Direct sum where its tail is certified, the completed-function route elsewhere.
inline cplx l_eval(const FormDescriptor& f, cplx s, const EvalConfig& cfg = {}) {
    if (s.real() >= f.k / 2.0 + 1.0 && direct_certified(f, s.real(), cfg.target_eps)) return l_direct(f, s, cfg.target_eps);
    return l_via_xi(f, s, cfg);
}

/// Runs the one-time check of the xi normalization against the direct sum.
inline void validate_normalization(FormDescriptor& f, double tol = 1e-8) {
    double sigma = std::ceil(f.abs_convergence() + 1.0);
    while (sigma <= 40.0 && f.tail.sum_bound(sigma) > 1e-13) sigma += 0.5;
    if (sigma > 40.0) {
        f.normalization = NormalizationStatus::unchecked;
        return;
    }
    const cplx s(sigma, 0.5);
    const cplx direct = partial_sum(f.coeffs, s, static_cast<double>(f.size()));
    cplx via_xi;
    try {
        via_xi = detail::l_from_scaled_xi(detail::xi_scaled_raw(f, s, EvalConfig{}.xi_rotation), s);
    } catch (const convergence_error&) {
        f.normalization = NormalizationStatus::unchecked;
        return;
    }
    f.normalization_residual = std::abs(via_xi - direct) / std::abs(direct);
    f.normalization = f.normalization_residual <= tol ? NormalizationStatus::passed : NormalizationStatus::failed;
}

/// Builds a form and runs the normalization self-test.
inline FormDescriptor make_form(std::string id, int k, int ell, std::vector<cplx> coeffs) {
    if (k < 1) throw domain_error("make_form: k must be >= 1");
    if (ell != 0 && ell != 1) throw domain_error("make_form: ell must be 0 or 1");
    FormDescriptor f{std::move(id), k, ell, CoefficientTable(std::move(coeffs), k), true, {}, {}, {}};
    f.real_coeffs = f.coeffs.real();
    f.tail = fit_tail_bound(f.coeffs);
    validate_normalization(f);
    return f;
}

/// g = theta^-3 eta(2z)^12 in S_{9/2}(Gamma0(4)): k = 4, Fricke eigenvalue +1.
inline FormDescriptor g_form(std::size_t table_length = 20000) {
    return make_form("g", 4, 0, to_complex(g_coefficients_triangular(table_length)));
}

struct AfeResult {
    cplx value;
    std::array<cplx, 6> terms{};  ///< J1..J6
    double err_est = 0.0;
    double x = 0.0;
    double half_width = 0.0;  ///< integration range |Im w| <= half_width
    bool dispatched = false;  ///< |t| < t_small: value came from l_eval
};

namespace detail {

/// Trapezoid rule on [-V, V] with step halving until successive estimates agree.
/// The integrands are analytic and negligible at the ends, so the rule converges
/// geometrically. Returns the integral of f(v) dv and the last change as error estimate.
template <class F>
std::pair<cplx, double> trapezoid_halving(F&& f, double V, double step0, double tol, int max_halvings = 10) {
    auto panels = static_cast<std::size_t>(std::ceil(2.0 * V / step0));
    panels = std::max<std::size_t>(panels, 2);
    double h = 2.0 * V / static_cast<double>(panels);
    cplx sum = 0.5 * (f(-V) + f(V));
    for (std::size_t i = 1; i < panels; ++i) sum += f(-V + h * static_cast<double>(i));
    cplx est = sum * h;
    double change = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_halvings; ++it) {
        cplx mid = 0.0;
        for (std::size_t i = 0; i < panels; ++i) mid += f(-V + h * (static_cast<double>(i) + 0.5));
        sum += mid;
        panels *= 2;
        h /= 2.0;
        const cplx next = sum * h;
        change = std::abs(next - est);
        est = next;
        if (change < tol) break;
    }
    return {est, change};
}

} // namespace detail

/// Truncated approximate functional equation
///   L(s) = J1 + ... + J6
/// with cut sums at x, smoothing exp(-(n/x)^h), the reflected sum with the Gamma ratio,
/// and two vertical-line integrals at Re w = -eta and Re w = alpha.
///
/// The tail sum over n > x inside J5 converges only like n^{-1/4 - eta + ...}; it is
/// formed as L(k + 1/2 - s - w) minus the head over n <= x.
inline AfeResult l_afe(const FormDescriptor& f, cplx s, const EvalConfig& cfg = {}) {
    using detail::pi;
    const double sigma = s.real();
    const double t = s.imag();
    AfeResult out;
    if (std::abs(t) < cfg.t_small) {
        out.value = l_eval(f, s, cfg);
        out.terms[0] = out.value;
        out.dispatched = true;
        return out;
    }
    const double k = f.k;
    const double eta = cfg.eta;
    const double alpha = std::isnan(cfg.alpha) ? f.critical_line() / 2.0 : cfg.alpha;
    const int h = cfg.h;
    if (h != 1 && h != 2) throw domain_error("l_afe: h must be 1 or 2");
    if (!(eta > sigma - k / 2.0 + 0.25)) throw domain_error("l_afe: need eta > sigma - k/2 + 1/4");
    if (eta == std::floor(eta)) throw domain_error("l_afe: eta must not be an integer");
    if (!(eta < h)) throw domain_error("l_afe: need eta < h so that only the pole at w = 0 is crossed");
    if (!(alpha > 0.0 && alpha < f.critical_line())) throw domain_error("l_afe: need 0 < alpha < k/2 + 1/4");

    const double x = cfg.x > 0.0 ? cfg.x : std::max(10.0, std::abs(t));
    const auto head = static_cast<std::size_t>(std::floor(x));
    // smoothing weight below 1e-18 beyond n_max
    const auto n_max = static_cast<std::size_t>(std::ceil(x * std::pow(41.5, 1.0 / h)));
    if (n_max > f.size()) throw domain_error("l_afe: coefficient table exhausted (need " + std::to_string(n_max) + ")");
    out.x = x;

    const cplx dual = f.weight() - s;
    const double sign = f.fricke_sign();
    std::array<cplx, 6> J{};
    std::vector<cplx> dual_coeff(head);  // a(n) n^{-(k+1/2-s)}
    std::vector<double> logn(head);
    for (std::size_t n = 1; n <= head; ++n) {
        const double ln = std::log(static_cast<double>(n));
        const cplx an = f.coeffs(n);
        const cplx term = an * std::exp(-s * ln);
        J[0] += term;
        J[1] += term * (std::exp(-std::pow(static_cast<double>(n) / x, h)) - 1.0);
        logn[n - 1] = ln;
        dual_coeff[n - 1] = an * std::exp(-dual * ln);
    }
    for (std::size_t n = head + 1; n <= n_max; ++n) {
        const cplx an = f.coeffs(n);
        if (an == cplx(0.0)) continue;
        J[2] += an * std::exp(-s * std::log(static_cast<double>(n))) * std::exp(-std::pow(static_cast<double>(n) / x, h));
    }
    cplx dual_head = 0.0;
    for (const auto& c : dual_coeff) dual_head += c;
    const cplx reflect = sign * std::exp((2.0 * s - f.weight()) * std::log(pi));
    J[3] = reflect * std::exp(log_gamma(dual) - log_gamma(s)) * dual_head;

    const double log2t = std::pow(std::log(std::abs(t)), 2);
    double V = log2t;
    if (!cfg.strict_truncation)
        V = std::max(V, (2.0 * h / pi) * (std::log(1.0 / cfg.target_eps) + 10.0));
    out.half_width = V;
    const cplx pref = -reflect / (2.0 * pi * cplx(0.0, 1.0) * static_cast<double>(h));
    const double lpx = std::log(pi * pi * x);
    auto kernel = [&](cplx w) {
        return std::exp(log_gamma(dual - w) + log_gamma(w / static_cast<double>(h)) - log_gamma(s + w) + w * lpx);
    };
    auto head_sum = [&](cplx w) {
        cplx acc = 0.0;
        for (std::size_t i = 0; i < head; ++i) acc += dual_coeff[i] * std::exp(w * logn[i]);
        return acc;
    };
    const double scale = std::max(1.0, std::abs(J[0] + J[3]));
    const double tol = cfg.target_eps * scale / 10.0;
    const cplx I(0.0, 1.0);

    // dw = i dv
    auto [int5, err5] = detail::trapezoid_halving(
        [&](double v) {
            const cplx w(-eta, v);
            const cplx tail = l_eval(f, dual - w, cfg) - head_sum(w);
            return kernel(w) * tail * I;
        },
        V, cfg.quad_step, tol / std::abs(pref));
    auto [int6, err6] = detail::trapezoid_halving(
        [&](double v) {
            const cplx w(alpha, v);
            return kernel(w) * head_sum(w) * I;
        },
        V, cfg.quad_step, tol / std::abs(pref));
    J[4] = pref * int5;
    J[5] = pref * int6;

    // size of the neglected range, from the integrand at the cut
    auto edge = [&](double re) {
        return std::max(std::abs(kernel(cplx(re, V))), std::abs(kernel(cplx(re, -V))));
    };
    const double trunc = std::abs(pref) * (2.0 * h / pi) *
                         (edge(-eta) * (std::abs(l_eval(f, dual - cplx(-eta, V), cfg)) + std::abs(head_sum(cplx(-eta, V)))) +
                          edge(alpha) * std::abs(head_sum(cplx(alpha, V))));

    out.terms = J;
    out.value = J[0] + J[1] + J[2] + J[3] + J[4] + J[5];
    out.err_est = std::abs(pref) * (err5 + err6) + trunc;
    return out;
}

struct DerivativeResult {
    cplx value;
    double err_est;
};

/// L'(s) from the Cauchy integral over a circle of the given radius, trapezoid rule with
/// 32 nodes and an error estimate from doubling to 64.
inline DerivativeResult l_derivative(const FormDescriptor& f, cplx s, const EvalConfig& cfg = {}, double radius = 0.1) {
    auto cauchy = [&](int nodes, int stride, const std::vector<cplx>& vals) {
        cplx acc = 0.0;
        for (int j = 0; j < nodes; ++j) acc += vals[static_cast<std::size_t>(j * stride)] * std::polar(1.0, -2.0 * detail::pi * j / nodes);
        return acc / (static_cast<double>(nodes) * radius);
    };
    constexpr int fine = 64;
    std::vector<cplx> vals(fine);
    for (int j = 0; j < fine; ++j) vals[static_cast<std::size_t>(j)] = l_eval(f, s + radius * std::polar(1.0, 2.0 * detail::pi * j / fine), cfg);
    const cplx coarse = cauchy(32, 2, vals);
    const cplx best = cauchy(fine, 1, vals);
    return {best, std::abs(best - coarse)};
}

} // namespace hiwl

#pragma once

// Complex log-gamma and upper incomplete gamma.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "hiwl/error.hpp"

namespace hiwl {

using cplx = std::complex<double>;

namespace detail {

// B_{2k} / (2k (2k-1)), k = 1..12
inline constexpr std::array<double, 12> stirling_coeffs = {
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
    77683.0 / 5796.0,
    -236364091.0 / 1506960.0,
};

inline bool is_nonpositive_integer(cplx z) {
    return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real());
}

inline cplx log_gamma_stirling(cplx z) {
    const cplx inv = 1.0 / z;
    const cplx inv2 = inv * inv;
    cplx series = 0.0;
    cplx p = inv;
    for (double c : stirling_coeffs) {
        series += c * p;
        p *= inv2;
    }
    return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * std::numbers::pi) + series;
}

} // namespace detail

/// Principal branch of log Gamma(z): analytic off the negative real axis and real on
/// the positive axis. Points with Re z < -40 go through the reflection formula and are
/// only guaranteed modulo 2 pi i.
inline cplx log_gamma(cplx z) {
    if (detail::is_nonpositive_integer(z)) throw domain_error("log_gamma: pole at nonpositive integer");
    constexpr double pi = std::numbers::pi;
    if (z.real() < -40.0) {
        return std::log(pi) - std::log(std::sin(pi * z)) - log_gamma(1.0 - z);
    }
    cplx shift = 0.0;
    while (std::abs(z) < 20.0 || z.real() < 0.0) {
        shift += std::log(z);
        z += 1.0;
    }
    return detail::log_gamma_stirling(z) - shift;
}

/// 1 / Gamma(z); entire, exactly zero at the poles of Gamma.
inline cplx rgamma(cplx z) {
    if (detail::is_nonpositive_integer(z)) return 0.0;
    constexpr double pi = std::numbers::pi;
    if (z.real() < 0.5) return std::sin(pi * z) / pi * std::exp(log_gamma(1.0 - z));
    return std::exp(-log_gamma(z));
}

/// Digamma function, used for Stirling-based phase estimates.
inline cplx digamma(cplx z) {
    if (detail::is_nonpositive_integer(z)) throw domain_error("digamma: pole at nonpositive integer");
    constexpr double pi = std::numbers::pi;
    if (z.real() < 0.5) return digamma(1.0 - z) - pi / std::tan(pi * z);
    cplx shift = 0.0;
    while (std::abs(z) < 20.0) {
        shift += 1.0 / z;
        z += 1.0;
    }
    const cplx inv = 1.0 / z;
    const cplx inv2 = inv * inv;
    // psi(z) ~ log z - 1/(2z) - sum B_{2k} / (2k z^{2k})
    constexpr std::array<double, 8> b = {1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0,
                                         5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0};
    cplx series = 0.0;
    cplx p = inv2;
    for (std::size_t k = 0; k < b.size(); ++k) {
        series += b[k] / (2.0 * static_cast<double>(k + 1)) * p;
        p *= inv2;
    }
    return std::log(z) - 0.5 * inv - series - shift;
}

struct IncompleteGammaOptions {
    double rel_tol = 1e-15;
    int max_iter = 100000;
};

/// Upper incomplete gamma Gamma(a, z) * exp(log_scale) for complex a, z and log_scale, with
/// Re z > 0, integrating along the ray from z to infinity. The scale factor lets callers
/// keep values whose magnitude is far below the double range (e^{-pi |t| / 2}).
///
/// Legendre continued fraction (modified Lentz) when |z| > |a| + 1, otherwise
/// Gamma(a) minus the lower-gamma power series. Each regime falls back on the other
/// when it exhausts its iteration budget.
inline cplx upper_incomplete_gamma_scaled(cplx a, cplx z, cplx log_scale,
                                          const IncompleteGammaOptions& opt = {}) {
    if (!(z.real() > 0.0)) throw domain_error("upper_incomplete_gamma: need Re z > 0");
    const cplx log_prefactor = a * std::log(z) - z + log_scale;

    auto continued_fraction = [&](cplx& out) {
        constexpr double tiny = 1e-300;
        cplx b = z + 1.0 - a;
        cplx c = 1.0 / tiny;
        cplx d = 1.0 / b;
        cplx h = d;
        for (int i = 1; i <= opt.max_iter; ++i) {
            const cplx an = -static_cast<double>(i) * (static_cast<double>(i) - a);
            b += 2.0;
            d = an * d + b;
            if (std::abs(d) < tiny) d = tiny;
            c = b + an / c;
            if (std::abs(c) < tiny) c = tiny;
            d = 1.0 / d;
            const cplx del = d * c;
            h *= del;
            if (std::abs(del - 1.0) < opt.rel_tol) {
                out = std::exp(log_prefactor) * h;
                return true;
            }
        }
        return false;
    };

    auto series = [&](cplx& out) {
        if (detail::is_nonpositive_integer(a)) return false;
        cplx term = 1.0 / a;
        cplx sum = term;
        for (int n = 1; n <= opt.max_iter; ++n) {
            term *= z / (a + static_cast<double>(n));
            sum += term;
            if (std::abs(term) < opt.rel_tol * std::abs(sum) && std::abs(z) < std::abs(a + static_cast<double>(n)))
                break;
            if (n == opt.max_iter) return false;
        }
        out = std::exp(log_gamma(a) + log_scale) - std::exp(log_prefactor) * sum;
        return true;
    };

    cplx out;
    if (std::abs(z) > std::abs(a) + 1.0) {
        if (continued_fraction(out) || series(out)) return out;
    } else {
        if (series(out) || continued_fraction(out)) return out;
    }
    throw convergence_error("upper_incomplete_gamma: no regime converged");
}

/// Gamma(s, x) = int_x^inf t^{s-1} e^{-t} dt for real x > 0.
inline cplx upper_incomplete_gamma(cplx s, double x) {
    if (!(x > 0.0)) throw domain_error("upper_incomplete_gamma: x must be positive");
    return upper_incomplete_gamma_scaled(s, cplx(x, 0.0), cplx(0.0));
}

} // namespace hiwl

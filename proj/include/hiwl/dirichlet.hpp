#pragma once

// Dirichlet-series algebra over the positive integers: partial sums, the reciprocal
// series 1/L, the coefficients of L'/L, the dominance abscissa, and the
// Montgomery-Vaughan mean-value identity.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "hiwl/error.hpp"
#include "hiwl/special.hpp"

namespace hiwl {

/// Coefficients a(1..N) of a Dirichlet series attached to a weight k + 1/2 form.
class CoefficientTable {
public:
    CoefficientTable(std::vector<cplx> a, int k) : a_(std::move(a)), k_(k) {
        if (a_.size() < 2) throw domain_error("CoefficientTable: need N >= 2 coefficients");
    }

    std::size_t size() const noexcept { return a_.size(); }
    int k() const noexcept { return k_; }
    const cplx& operator()(std::size_t n) const { return a_[n - 1]; }
    std::span<const cplx> values() const noexcept { return a_; }
    bool normalized() const noexcept { return a_[0] == cplx(1.0, 0.0); }

    bool real() const noexcept {
        return std::all_of(a_.begin(), a_.end(), [](const cplx& v) { return v.imag() == 0.0; });
    }

    /// Divides through by a(1).
    CoefficientTable normalize() const {
        if (a_[0] == cplx(0.0)) throw domain_error("CoefficientTable: a(1) = 0 cannot be normalized");
        std::vector<cplx> out(a_);
        const cplx a1 = a_[0];
        for (auto& v : out) v /= a1;
        out[0] = 1.0;
        return CoefficientTable(std::move(out), k_);
    }

    CoefficientTable truncated(std::size_t n) const {
        if (n < 2 || n > a_.size()) throw domain_error("CoefficientTable: bad truncation length");
        return CoefficientTable(std::vector<cplx>(a_.begin(), a_.begin() + static_cast<std::ptrdiff_t>(n)), k_);
    }

private:
    std::vector<cplx> a_;
    int k_;
};

/// Dirichlet convolution (f * g)(n) = sum_{de = n} f(d) g(e); 1-indexed inputs stored 0-based.
template <class T>
std::vector<T> dirichlet_convolve(std::span<const T> f, std::span<const T> g) {
    const std::size_t n = std::min(f.size(), g.size());
    std::vector<T> out(n, T(0));
    for (std::size_t d = 1; d <= n; ++d) {
        if (f[d - 1] == T(0)) continue;
        for (std::size_t e = 1; d * e <= n; ++e) out[d * e - 1] += f[d - 1] * g[e - 1];
    }
    return out;
}

/// Inverse under Dirichlet convolution; requires f(1) = 1.
/// d(1) = 1, d(n) = -sum_{d | n, d < n} d(d) f(n/d).
template <class T>
std::vector<T> dirichlet_inverse(std::span<const T> f) {
    if (f.empty() || f[0] != T(1)) throw domain_error("dirichlet_inverse: leading coefficient must be 1");
    const std::size_t n = f.size();
    std::vector<T> acc(n, T(0));
    std::vector<T> d(n, T(0));
    for (std::size_t m = 1; m <= n; ++m) {
        d[m - 1] = m == 1 ? T(1) : T(-acc[m - 1]);
        if (d[m - 1] == T(0)) continue;
        for (std::size_t j = 2; m * j <= n; ++j) acc[m * j - 1] += d[m - 1] * f[j - 1];
    }
    return d;
}

/// Dirichlet coefficients of 1/L.
struct ReciprocalTable {
    std::vector<cplx> d;
    const cplx& operator()(std::size_t n) const { return d[n - 1]; }
};

/// Dirichlet coefficients b(n) of L'/L over the integers (the c = 1 case).
struct LogDerivTable {
    std::vector<cplx> b;
    std::size_t c = 1;
    const cplx& operator()(std::size_t n) const { return b[n - 1]; }
};

/// sum_{n <= x} a(n) n^{-s}
inline cplx partial_sum(const CoefficientTable& table, cplx s, double x) {
    if (x > static_cast<double>(table.size())) throw domain_error("partial_sum: cutoff exceeds table length");
    const auto cutoff = static_cast<std::size_t>(std::floor(x));
    cplx sum = 0.0;
    for (std::size_t n = 1; n <= cutoff; ++n) {
        const cplx an = table(n);
        if (an == cplx(0.0)) continue;
        sum += an * std::exp(-s * std::log(static_cast<double>(n)));
    }
    return sum;
}

inline ReciprocalTable reciprocal_coeffs(const CoefficientTable& table, std::size_t n) {
    if (!table.normalized()) throw domain_error("reciprocal_coeffs: table must be normalized (a(1) = 1)");
    if (n > table.size()) throw domain_error("reciprocal_coeffs: N exceeds table length");
    return {dirichlet_inverse<cplx>(table.values().first(n))};
}

inline LogDerivTable log_deriv_coeffs(const CoefficientTable& table, std::size_t n) {
    if (!table.normalized()) throw domain_error("log_deriv_coeffs: table must be normalized (a(1) = 1)");
    if (n > table.size()) throw domain_error("log_deriv_coeffs: N exceeds table length");
    std::vector<cplx> deriv(n);
    for (std::size_t m = 1; m <= n; ++m) deriv[m - 1] = -table(m) * std::log(static_cast<double>(m));
    const auto inverse = dirichlet_inverse<cplx>(table.values().first(n));
    LogDerivTable out{dirichlet_convolve<cplx>(deriv, inverse), 1};
    out.b[0] = 0.0;
    return out;
}

/// Envelope |a(n)| <= C n^theta for the coefficients beyond the table, with theta = k/2 + 1/2
/// and C fitted (times a safety factor of 2) on the upper half of the table.
struct TailBound {
    double C = 0.0;
    double theta = 0.0;
    std::size_t N = 0;

    /// Bound on sum_{n > N} |a(n)| n^{-sigma}; infinite when the envelope does not converge.
    double sum_bound(double sigma) const {
        if (C == 0.0) return 0.0;
        if (sigma <= theta + 1.0) return std::numeric_limits<double>::infinity();
        const double Nd = static_cast<double>(N);
        return C * std::pow(Nd, theta + 1.0 - sigma) / (sigma - theta - 1.0);
    }
};

inline TailBound fit_tail_bound(const CoefficientTable& table) {
    TailBound tb;
    tb.N = table.size();
    tb.theta = table.k() / 2.0 + 0.5;
    double c = 0.0;
    for (std::size_t n = std::max<std::size_t>(2, tb.N / 2); n <= tb.N; ++n)
        c = std::max(c, std::abs(table(n)) / std::pow(static_cast<double>(n), tb.theta));
    tb.C = 2.0 * c;
    return tb;
}

/// Smallest candidate B on the grid start, start + 1/2, ... with
/// sum_{n >= 2} |a(n)| n^{-B} (plus the fitted tail bound) <= 1/2, so that |L(s)| >= 1/2
/// for Re s >= B. The default grid starts at the absolute-convergence abscissa k/2 + 3/4.
inline double dominance_abscissa(const CoefficientTable& table, double start = std::numeric_limits<double>::quiet_NaN(),
                                 double max_search = 200.0) {
    if (!table.normalized()) throw domain_error("dominance_abscissa: table must be normalized");
    if (std::isnan(start)) start = table.k() / 2.0 + 0.75;
    const TailBound tail = fit_tail_bound(table);
    for (double B = start; B <= start + max_search; B += 0.5) {
        double head = 0.0;
        for (std::size_t n = 2; n <= table.size(); ++n) {
            const double m = std::abs(table(n));
            if (m != 0.0) head += m * std::pow(static_cast<double>(n), -B);
        }
        if (head + tail.sum_bound(B) <= 0.5) return B;
    }
    throw convergence_error("dominance_abscissa: table too short to certify the tail");
}

struct MeanSquareIdentity {
    cplx lhs;
    cplx rhs;
    double bound;
};

/// Both sides of int_0^T (sum a_n n^{-it})(sum b_n n^{it}) dt = T sum a_n b_n + O(bound),
/// the left side integrated term by term in closed form.
inline MeanSquareIdentity mv_mean_square(std::span<const cplx> a, std::span<const cplx> b, double T) {
    if (a.size() != b.size()) throw domain_error("mv_mean_square: length mismatch");
    if (!(T > 0.0)) throw domain_error("mv_mean_square: T must be positive");
    const std::size_t n = a.size();
    MeanSquareIdentity out{0.0, 0.0, 0.0};
    double na = 0.0, nb = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        out.rhs += T * a[i - 1] * b[i - 1];
        na += static_cast<double>(i) * std::norm(a[i - 1]);
        nb += static_cast<double>(i) * std::norm(b[i - 1]);
    }
    out.lhs = out.rhs;
    const cplx I(0.0, 1.0);
    for (std::size_t m = 1; m <= n; ++m) {
        if (a[m - 1] == cplx(0.0)) continue;
        for (std::size_t k = 1; k <= n; ++k) {
            if (k == m || b[k - 1] == cplx(0.0)) continue;
            // int_0^T (k/m)^{it} dt
            const double lr = std::log(static_cast<double>(k) / static_cast<double>(m));
            out.lhs += a[m - 1] * b[k - 1] * (std::exp(I * (T * lr)) - 1.0) / (I * lr);
        }
    }
    out.bound = std::sqrt(na) * std::sqrt(nb);
    return out;
}

} // namespace hiwl

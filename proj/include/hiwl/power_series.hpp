#pragma once

// Exact integer q-expansions and the Fourier coefficients of
// g(z) = theta(z)^-3 eta(2z)^12, the weight 9/2 cusp form on Gamma0(4).

#include <complex>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hiwl/error.hpp"

namespace hiwl {

using BigInt = boost::multiprecision::cpp_int;

/// Truncated power series sum_{n<=N} c_n q^n with exact integer coefficients.
/// Every operation works modulo q^{N+1}; indices above N are never touched.
class PowerSeries {
public:
    explicit PowerSeries(std::size_t order) : coeffs_(order + 1) {
        if (order < 1) throw domain_error("PowerSeries: truncation order must be >= 1");
    }

    explicit PowerSeries(std::vector<BigInt> coeffs) : coeffs_(std::move(coeffs)) {
        if (coeffs_.size() < 2) throw domain_error("PowerSeries: truncation order must be >= 1");
    }

    static PowerSeries one(std::size_t order) {
        PowerSeries s(order);
        s.coeffs_[0] = 1;
        return s;
    }

    static PowerSeries monomial(std::size_t order, std::size_t exponent, BigInt c = 1) {
        PowerSeries s(order);
        if (exponent <= order) s.coeffs_[exponent] = std::move(c);
        return s;
    }

    std::size_t order() const noexcept { return coeffs_.size() - 1; }
    const BigInt& operator[](std::size_t n) const { return coeffs_.at(n); }
    BigInt& operator[](std::size_t n) { return coeffs_.at(n); }
    const std::vector<BigInt>& coeffs() const noexcept { return coeffs_; }

    friend bool operator==(const PowerSeries&, const PowerSeries&) = default;

private:
    std::vector<BigInt> coeffs_;
};

namespace detail {

inline std::vector<std::size_t> nonzero_indices(const PowerSeries& a) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i <= a.order(); ++i)
        if (!a[i].is_zero()) idx.push_back(i);
    return idx;
}

} // namespace detail

/// Cauchy product truncated at the common order.
inline PowerSeries mul(const PowerSeries& a, const PowerSeries& b) {
    if (a.order() != b.order()) throw domain_error("mul: truncation orders differ");
    const std::size_t n = a.order();
    // iterate over the sparser factor
    const auto ia = detail::nonzero_indices(a);
    const auto ib = detail::nonzero_indices(b);
    const bool a_sparse = ia.size() <= ib.size();
    const PowerSeries& s = a_sparse ? a : b;
    const PowerSeries& d = a_sparse ? b : a;
    const auto& sidx = a_sparse ? ia : ib;

    PowerSeries out(n);
    BigInt tmp;
    for (std::size_t i : sidx) {
        const BigInt& si = s[i];
        for (std::size_t j = 0; i + j <= n; ++j) {
            if (d[j].is_zero()) continue;
            boost::multiprecision::multiply(tmp, si, d[j]);
            out[i + j] += tmp;
        }
    }
    return out;
}

/// Multiplicative inverse; requires a unit constant term so the result is integral.
inline PowerSeries inv(const PowerSeries& a) {
    if (a[0] != 1 && a[0] != -1) throw domain_error("inv: constant term must be +1 or -1");
    const std::size_t n = a.order();
    const int a0 = a[0] == 1 ? 1 : -1;
    std::vector<std::size_t> idx;
    for (std::size_t j = 1; j <= n; ++j)
        if (!a[j].is_zero()) idx.push_back(j);

    PowerSeries b(n);
    b[0] = a0;
    BigInt acc, tmp;
    for (std::size_t m = 1; m <= n; ++m) {
        acc = 0;
        for (std::size_t j : idx) {
            if (j > m) break;
            boost::multiprecision::multiply(tmp, a[j], b[m - j]);
            acc += tmp;
        }
        b[m] = a0 == 1 ? BigInt(-acc) : acc;
    }
    return b;
}

/// theta(z) = sum_{n in Z} q^{n^2}.
inline PowerSeries theta_series(std::size_t order) {
    PowerSeries s(order);
    s[0] = 1;
    for (std::size_t m = 1; m * m <= order; ++m) s[m * m] = 2;
    return s;
}

/// eta(2z)^12 = q * prod_{n>=1} (1 - q^{2n})^12.
///
/// Built from Jacobi's identity prod (1-q^n)^3 = sum_m (-1)^m (2m+1) q^{m(m+1)/2},
/// raised to the fourth power by sparse products.
inline PowerSeries eta2_pow12(std::size_t order) {
    // P(q^2) truncated so that q * P(q^2)^4 fits in `order`.
    PowerSeries cube(order);
    for (std::size_t m = 0;; ++m) {
        const std::size_t e = m * (m + 1);  // exponent of q after q -> q^2
        if (e > order) break;
        const long sign = (m % 2 == 0) ? 1 : -1;
        cube[e] = sign * static_cast<long>(2 * m + 1);
    }
    PowerSeries p4 = mul(mul(mul(cube, cube), cube), cube);
    PowerSeries out(order);
    for (std::size_t i = 0; i + 1 <= order; ++i) out[i + 1] = p4[i];
    return out;
}

/// Exact integer Fourier coefficients, 1-indexed by n (a(0)=0 is dropped).
class ExactCoefficients {
public:
    explicit ExactCoefficients(std::vector<BigInt> values) : values_(std::move(values)) {}
    std::size_t size() const noexcept { return values_.size(); }
    const BigInt& operator()(std::size_t n) const { return values_.at(n - 1); }
    const std::vector<BigInt>& values() const noexcept { return values_; }
    friend bool operator==(const ExactCoefficients&, const ExactCoefficients&) = default;

private:
    std::vector<BigInt> values_;
};

namespace detail {

inline ExactCoefficients drop_constant(const PowerSeries& g) {
    if (!g[0].is_zero()) throw std::logic_error("g has a nonzero constant term");
    return ExactCoefficients({g.coeffs().begin() + 1, g.coeffs().end()});
}

} // namespace detail

/// a_g(1..N) as the coefficients of inv(theta^3) * eta(2z)^12.
inline ExactCoefficients g_coefficients(std::size_t order) {
    const PowerSeries th = theta_series(order);
    const PowerSeries th3 = mul(mul(th, th), th);
    return detail::drop_constant(mul(inv(th3), eta2_pow12(order)));
}

/// a_g(1..N) by forward substitution in the triangular system theta^3 * g = eta(2z)^12.
/// No intermediate series is inverted, so every quantity stays small.
inline ExactCoefficients g_coefficients_triangular(std::size_t order) {
    const PowerSeries th = theta_series(order);
    const PowerSeries th3 = mul(mul(th, th), th);
    const PowerSeries rhs = eta2_pow12(order);

    // 128-bit fast path with overflow detection; falls through to BigInt on overflow.
    {
        using i128 = __int128;
        const BigInt limit = (BigInt(1) << 120);
        bool ok = true;
        std::vector<i128> r(order + 1), e(order + 1), g(order + 1);
        for (std::size_t i = 0; i <= order && ok; ++i) {
            if (boost::multiprecision::abs(th3[i]) >= limit || boost::multiprecision::abs(rhs[i]) >= limit) {
                ok = false;
                break;
            }
            r[i] = static_cast<i128>(th3[i].convert_to<long long>());
            const BigInt hi = rhs[i] >> 62;
            const BigInt lo = rhs[i] - (hi << 62);
            e[i] = static_cast<i128>(hi.convert_to<long long>()) * (i128(1) << 62) +
                   static_cast<i128>(lo.convert_to<long long>());
        }
        for (std::size_t n = 0; n <= order && ok; ++n) {
            i128 acc = e[n];
            for (std::size_t j = 1; j <= n; ++j) {
                if (r[j] == 0) continue;
                i128 p;
                if (__builtin_mul_overflow(r[j], g[n - j], &p) || __builtin_sub_overflow(acc, p, &acc)) {
                    ok = false;
                    break;
                }
            }
            g[n] = acc;
        }
        if (ok) {
            if (g[0] != 0) throw std::logic_error("g has a nonzero constant term");
            std::vector<BigInt> vals;
            vals.reserve(order);
            for (std::size_t n = 1; n <= order; ++n) {
                const i128 v = g[n];
                const bool neg = v < 0;
                unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
                BigInt b = BigInt(static_cast<unsigned long long>(u >> 64)) << 64;
                b += static_cast<unsigned long long>(u);
                vals.push_back(neg ? BigInt(-b) : b);
            }
            return ExactCoefficients(std::move(vals));
        }
    }

    PowerSeries g(order);
    BigInt acc, tmp;
    for (std::size_t n = 0; n <= order; ++n) {
        acc = rhs[n];
        for (std::size_t j = 1; j <= n; ++j) {
            if (th3[j].is_zero() || g[n - j].is_zero()) continue;
            boost::multiprecision::multiply(tmp, th3[j], g[n - j]);
            acc -= tmp;
        }
        g[n] = acc;  // th3[0] == 1
    }
    return detail::drop_constant(g);
}

/// Converts exact coefficients to complex doubles.
inline std::vector<std::complex<double>> to_complex(const ExactCoefficients& c) {
    std::vector<std::complex<double>> out;
    out.reserve(c.size());
    for (const auto& v : c.values()) out.emplace_back(v.convert_to<double>(), 0.0);
    return out;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& field, std::size_t line) {
    const std::string f = trim(field);
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(f, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (f.empty() || used != f.size())
        throw format_error("line " + std::to_string(line) + ": non-numeric value '" + f + "'");
    return v;
}

} // namespace detail

/// Reads a coefficient table: lines "n,value" or "n,re,im", n = 1, 2, 3, ...
/// An optional header line starting with "n," is skipped.
inline std::vector<std::complex<double>> parse_coefficients(std::istream& in) {
    std::vector<std::complex<double>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::trim(line);
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("n,", 0) == 0) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
        if (fields.size() != 2 && fields.size() != 3)
            throw format_error("line " + std::to_string(lineno) + ": expected 'n,value' or 'n,re,im'");
        const double nd = detail::parse_double(fields[0], lineno);
        const auto expected = static_cast<double>(out.size() + 1);
        if (nd != expected)
            throw format_error("line " + std::to_string(lineno) + ": expected index " +
                               std::to_string(out.size() + 1) + ", found '" + detail::trim(fields[0]) +
                               "'");
        const double re = detail::parse_double(fields[1], lineno);
        const double im = fields.size() == 3 ? detail::parse_double(fields[2], lineno) : 0.0;
        out.emplace_back(re, im);
    }
    if (out.empty()) throw format_error("coefficient table is empty");
    return out;
}

inline std::vector<std::complex<double>> load_coefficients(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open coefficient file " + path);
    return parse_coefficients(in);
}

} // namespace hiwl

#include <gtest/gtest.h>

#include <chrono>
#include <random>
#include <sstream>

#include "hiwl/power_series.hpp"

using namespace hiwl;

namespace {

// q * prod_{n>=1} (1 - q^{2n})^12 by repeated multiplication with binomials.
std::vector<long long> eta_product_oracle(std::size_t N) {
    std::vector<long long> p(N + 1, 0);
    p[0] = 1;
    for (std::size_t n = 1; 2 * n <= N; ++n)
        for (int rep = 0; rep < 12; ++rep)
            for (std::size_t i = N; i >= 2 * n; --i) p[i] -= p[i - 2 * n];
    std::vector<long long> out(N + 1, 0);
    for (std::size_t i = 0; i + 1 <= N; ++i) out[i + 1] = p[i];
    return out;
}

// r_3(n): representations as a sum of three squares, by enumeration.
std::vector<long long> r3_oracle(std::size_t N) {
    std::vector<long long> r(N + 1, 0);
    const long m = static_cast<long>(std::sqrt(static_cast<double>(N))) + 1;
    for (long a = -m; a <= m; ++a)
        for (long b = -m; b <= m; ++b)
            for (long c = -m; c <= m; ++c) {
                const long s = a * a + b * b + c * c;
                if (s <= static_cast<long>(N)) r[static_cast<std::size_t>(s)]++;
            }
    return r;
}

PowerSeries random_series(std::mt19937_64& rng, std::size_t order, bool unit) {
    std::uniform_int_distribution<int> d(-50, 50);
    PowerSeries s(order);
    for (std::size_t i = 0; i <= order; ++i) s[i] = d(rng);
    if (unit) s[0] = (rng() & 1) ? 1 : -1;
    return s;
}

} // namespace

TEST(ThetaSeries, ConstantAndSquares) {
    const auto th = theta_series(10);
    EXPECT_EQ(th[0], 1);
    EXPECT_EQ(th[1], 2);
    EXPECT_EQ(th[4], 2);
    EXPECT_EQ(th[9], 2);
    EXPECT_EQ(th[2], 0);
    EXPECT_EQ(th[10], 0);
}

TEST(ThetaSeries, CubeCountsThreeSquares) {
    const std::size_t N = 300;
    const auto th = theta_series(N);
    const auto cube = mul(mul(th, th), th);
    const auto r3 = r3_oracle(N);
    for (std::size_t n = 0; n <= N; ++n) EXPECT_EQ(cube[n], r3[n]) << "n=" << n;
}

TEST(Eta, MatchesProductExpansion) {
    const std::size_t N = 400;
    const auto e = eta2_pow12(N);
    const auto oracle = eta_product_oracle(N);
    for (std::size_t n = 0; n <= N; ++n) EXPECT_EQ(e[n], oracle[n]) << "n=" << n;
    EXPECT_EQ(e[1], 1);
    EXPECT_EQ(e[3], -12);
}

TEST(PowerSeries, RejectsOrderZero) {
    EXPECT_THROW(PowerSeries(0), domain_error);
    EXPECT_THROW(PowerSeries(std::vector<BigInt>{1}), domain_error);
}

TEST(PowerSeries, MulRejectsMismatchedOrders) { EXPECT_THROW(mul(PowerSeries(3), PowerSeries(4)), domain_error); }

TEST(PowerSeries, InvRequiresUnitConstant) {
    PowerSeries a(5);
    a[0] = 2;
    EXPECT_THROW(inv(a), domain_error);
    a[0] = 0;
    EXPECT_THROW(inv(a), domain_error);
}

TEST(PowerSeries, InverseTimesSelfIsOne) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t order = 1 + rng() % 40;
        const auto a = random_series(rng, order, true);
        EXPECT_EQ(mul(a, inv(a)), PowerSeries::one(order));
        EXPECT_EQ(inv(inv(a)), a);
    }
}

TEST(PowerSeries, MulCommutesAndAssociates) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t order = 1 + rng() % 30;
        const auto a = random_series(rng, order, false);
        const auto b = random_series(rng, order, false);
        const auto c = random_series(rng, order, false);
        EXPECT_EQ(mul(a, b), mul(b, a));
        EXPECT_EQ(mul(mul(a, b), c), mul(a, mul(b, c)));
        EXPECT_EQ(mul(a, PowerSeries::one(order)), a);
    }
}

TEST(GCoefficients, LeadingValues) {
    const auto a = g_coefficients(12);
    const std::vector<long> expect = {1, -6, 12, -8, 0, 12, -48, 48, -15, 60, -12, -96};
    ASSERT_EQ(a.size(), expect.size());
    for (std::size_t n = 1; n <= expect.size(); ++n) EXPECT_EQ(a(n), expect[n - 1]) << "n=" << n;
}

TEST(GCoefficients, SolvesTriangularSystemFromOracles) {
    // theta^3 * g = eta(2z)^12 with both sides from the enumeration oracles
    const std::size_t N = 250;
    const auto r3 = r3_oracle(N);
    const auto e = eta_product_oracle(N);
    const auto a = g_coefficients(N);
    for (std::size_t n = 1; n <= N; ++n) {
        BigInt acc = 0;
        for (std::size_t j = 0; j < n; ++j) acc += BigInt(r3[j]) * a(n - j);
        EXPECT_EQ(acc, e[n]) << "n=" << n;
    }
}

TEST(GCoefficients, BothRoutesAgree) {
    for (std::size_t N : {1, 2, 50, 1000}) EXPECT_EQ(g_coefficients(N), g_coefficients_triangular(N)) << "N=" << N;
}

TEST(GCoefficients, LargeTableStable) {
    // the 128-bit path against the inverse route
    const auto fast = g_coefficients_triangular(4000);
    const auto slow = g_coefficients(4000);
    EXPECT_EQ(fast, slow);
    // truncation does not change earlier coefficients
    const auto shorter = g_coefficients_triangular(1500);
    for (std::size_t n = 1; n <= 1500; ++n) ASSERT_EQ(shorter(n), fast(n));
}

TEST(GCoefficients, ToComplexIsExact) {
    const auto c = to_complex(g_coefficients_triangular(30));
    EXPECT_EQ(c[1], std::complex<double>(-6.0, 0.0));
    for (const auto& v : c) EXPECT_EQ(v.imag(), 0.0);
}

TEST(CoefficientIO, ParsesRealAndComplexRows) {
    std::istringstream in("n,a\n1,1\n2,-6\n3,2.5,-1\n");
    const auto v = parse_coefficients(in);
    ASSERT_EQ(v.size(), 3u);
    EXPECT_EQ(v[1], std::complex<double>(-6.0, 0.0));
    EXPECT_EQ(v[2], std::complex<double>(2.5, -1.0));
}

TEST(CoefficientIO, HeaderIsOptional) {
    std::istringstream in("1,1\n2,3\n");
    EXPECT_EQ(parse_coefficients(in).size(), 2u);
}

TEST(CoefficientIO, RejectsMalformedInput) {
    std::istringstream bad_index("1,1\n3,2\n");
    EXPECT_THROW(parse_coefficients(bad_index), format_error);
    std::istringstream non_numeric("1,1\n2,abc\n");
    EXPECT_THROW(parse_coefficients(non_numeric), format_error);
    std::istringstream too_many("1,1,2,3\n");
    EXPECT_THROW(parse_coefficients(too_many), format_error);
    std::istringstream empty("n,a\n");
    EXPECT_THROW(parse_coefficients(empty), format_error);
}

TEST(CoefficientIO, MissingFileIsIoError) { EXPECT_THROW(load_coefficients("/nonexistent/coeffs.csv"), io_error); }

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "hiwl/statistics.hpp"

using namespace hiwl;

namespace {

const FormDescriptor& G() {
    static const FormDescriptor g = g_form(20000);
    return g;
}

const LogDerivTable& B() {
    static const LogDerivTable b = log_deriv_coeffs(G().coeffs, 100);
    return b;
}

ZeroSet synthetic(std::vector<double> gammas, double beta = 2.25) {
    ZeroSet z{"synthetic", 4, 0, 0.0, 0, {}};
    for (double g : gammas) z.zeros.push_back({beta, g, ZeroKind::on_line, 0.0, ZeroMethod::bisection, 1e-9});
    z.box_count = static_cast<long>(z.zeros.size());
    z.T_max = gammas.empty() ? 0.0 : gammas.back() + 1.0;
    return z;
}

std::vector<double> random_points(std::mt19937_64& rng, std::size_t n, double hi) {
    std::uniform_real_distribution<double> d(0.0, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    std::sort(v.begin(), v.end());
    return v;
}

} // namespace

TEST(Weyl, SingleZero) {
    const std::vector<double> g = {0.5};
    const auto w = weyl_sum(g, 1);
    EXPECT_NEAR(std::abs(w.S - cplx(-1.0, 0.0)), 0.0, 1e-15);
    EXPECT_NEAR(w.S_over_N, 1.0, 1e-15);
}

TEST(Weyl, FullPeriodCancels) {
    std::vector<double> g;
    for (int n = 1; n <= 1000; ++n) g.push_back(n / 1000.0);
    EXPECT_LE(std::abs(weyl_sum(g, 1).S), 1.0);
}

TEST(Weyl, RejectsDegenerateInput) {
    const std::vector<double> g = {0.3};
    EXPECT_THROW(weyl_sum(g, 0), domain_error);
    EXPECT_THROW(weyl_sum(std::vector<double>{}, 1), domain_error);
}

TEST(Weyl, NegativeFrequencyConjugates) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = random_points(rng, 1 + rng() % 300, 500.0);
        for (long m = 1; m <= 5; ++m) EXPECT_NEAR(std::abs(weyl_sum(g, -m).S - std::conj(weyl_sum(g, m).S)), 0.0, 1e-10);
    }
}

TEST(Histogram, Examples) {
    const std::vector<double> g = {0.1, 0.6};
    EXPECT_EQ(fractional_histogram(g, 2), (std::vector<long>{1, 1}));
    EXPECT_EQ(fractional_histogram(g, 1), (std::vector<long>{2}));
    std::vector<double> grid;
    for (int n = 0; n < 1000; ++n) grid.push_back(n / 1000.0 + 7.0);
    for (long c : fractional_histogram(grid, 10)) EXPECT_NEAR(c, 100, 1);
    EXPECT_THROW(fractional_histogram(g, 0), domain_error);
}

TEST(Histogram, RefinementPreservesTotals) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        const auto g = random_points(rng, rng() % 400, 300.0);
        for (std::size_t b : {2u, 5u, 10u}) {
            const auto coarse = fractional_histogram(g, b), fine = fractional_histogram(g, 2 * b);
            EXPECT_EQ(std::accumulate(coarse.begin(), coarse.end(), 0L), static_cast<long>(g.size()));
            for (std::size_t j = 0; j < b; ++j) EXPECT_EQ(coarse[j], fine[2 * j] + fine[2 * j + 1]);
        }
    }
}

TEST(Discrepancy, Examples) {
    EXPECT_DOUBLE_EQ(star_discrepancy_unit({0.5}), 0.5);
    const std::size_t N = 64;
    std::vector<double> lattice;
    for (std::size_t n = 1; n <= N; ++n) lattice.push_back((2.0 * n - 1.0) / (2.0 * N));
    EXPECT_NEAR(star_discrepancy_unit(lattice), 1.0 / (2.0 * N), 1e-15);
    EXPECT_DOUBLE_EQ(star_discrepancy_unit(std::vector<double>(10, 0.0)), 1.0);
    EXPECT_THROW(star_discrepancy_unit({}), domain_error);
}

TEST(Discrepancy, WithinBounds) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const auto g = random_points(rng, 1 + rng() % 500, 100.0);
        const double d = star_discrepancy(g);
        EXPECT_GE(d, 1.0 / (2.0 * g.size()) - 1e-15);
        EXPECT_LE(d, 1.0);
    }
}

TEST(Landau, PredictedSlopes) {
    const double slope = 6.0 * std::log(2.0) / detail::pi;
    EXPECT_NEAR(slope, 1.32381, 1e-5);
    EXPECT_NEAR(landau_main_term(B(), 4.5, 2.0, 1.0).value, slope, 1e-13);
    EXPECT_TRUE(landau_main_term(B(), 4.5, 2.0, 1.0).exact_match);
    EXPECT_EQ(landau_main_term(B(), 4.5, 1.5, 200.0).value, 0.0);
    EXPECT_FALSE(landau_main_term(B(), 4.5, 1.5, 200.0).exact_match);
    EXPECT_NEAR(landau_main_term(B(), 4.5, 0.5, 200.0).value, -std::pow(0.5, 4.5) * slope * 200.0, 1e-12);
    EXPECT_NEAR(landau_main_term(B(), 4.5, 3.0, 1.0).value, -12.0 * std::log(3.0) / detail::pi, 1e-12);
    EXPECT_THROW(landau_main_term(B(), 4.5, 1.0, 1.0), domain_error);
    EXPECT_THROW(landau_main_term(B(), 4.5, -2.0, 1.0), domain_error);
    EXPECT_THROW(landau_main_term(B(), 4.5, 1000.0, 1.0), domain_error);
}

TEST(Landau, ObservedSumIsRealAndPaired) {
    const auto z = synthetic({3.0, 7.5, 11.25});
    const auto r = landau_verify(z, B(), 2.0, 12.0);
    EXPECT_LE(std::abs(r.observed.imag()), 1e-12);
    double expect = 0.0;
    for (double g : {3.0, 7.5, 11.25}) expect += 2.0 * std::pow(2.0, 2.25) * std::cos(g * std::log(2.0));
    EXPECT_NEAR(r.observed.real(), expect, 1e-12);
    EXPECT_EQ(r.N, 6);
    EXPECT_THROW(landau_verify(z, B(), 2.0, 100.0), domain_error);
}

TEST(MeanSquare, Basics) {
    EXPECT_EQ(mean_square_line(G(), 0.0).value, 0.0);
    const double a = mean_square_line(G(), 10.0).value;
    const double b = mean_square_line(G(), 20.0).value;
    EXPECT_GT(a, 0.0);
    EXPECT_GT(b, a);
    // two quadrature resolutions differ by well under 0.2%
    const auto m = mean_square_line(G(), 0.0, 20.0, {}, 1e-6);
    EXPECT_LT(std::abs(m.value - b) / b, 2e-3);
}

TEST(CoeffMeanSquare, Examples) {
    const auto one = coeff_mean_square(G().coeffs, 1.0);
    EXPECT_EQ(one.sum, 1.0);
    EXPECT_EQ(coeff_mean_square(G().coeffs, 2.0).sum, 37.0);
    EXPECT_THROW(coeff_mean_square(G().coeffs, 20001.0), domain_error);
    const double r5 = coeff_mean_square(G().coeffs, 5000.0).r_hat;
    const double r20 = coeff_mean_square(G().coeffs, 20000.0).r_hat;
    EXPECT_LT(std::abs(r5 - r20) / r20, 0.1);
    const double reg = coeff_mean_square_regression(G().coeffs);
    EXPECT_LT(std::abs(reg - r20) / r20, 0.1);
}

TEST(CoeffMeanSquare, MonotoneAndPositive) {
    double prev = 0.0;
    for (double x = 1.0; x <= 20000.0; x *= 1.7) {
        const auto c = coeff_mean_square(G().coeffs, x);
        EXPECT_GE(c.sum, prev);
        EXPECT_GT(c.r_hat, 0.0);
        prev = c.sum;
    }
}

TEST(Density, Examples) {
    auto z = synthetic({5.0, 9.0, 14.0});
    EXPECT_LE(density_sum(z, 20.0), 3 * 2e-9);
    z.zeros.push_back({2.35, 16.0, ZeroKind::off_line, 0.0, ZeroMethod::newton, 0.0});
    EXPECT_NEAR(density_sum(z, 20.0), 0.2, 1e-12);
    EXPECT_NEAR(density_sum(z, 15.0), 0.0, 1e-12);
}

TEST(Report, JsonKeys) {
    StatReport r;
    r.metric = "m";
    r.T = 5.0;
    r.observed = 1.5;
    r.verdict = Verdict::warn;
    r.zeroset_checksum = "abc";
    const auto j = r.to_json();
    for (const char* k : {"metric", "T", "observed", "predicted", "slack", "verdict", "zeroset_checksum"}) EXPECT_TRUE(j.contains(k)) << k;
    EXPECT_EQ(j["verdict"], "warn");
    r.observed = cplx(1.0, 2.0);
    EXPECT_TRUE(r.to_json()["observed"].is_array());
}

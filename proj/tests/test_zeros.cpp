#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hiwl/zeros.hpp"

using namespace hiwl;

namespace {

const FormDescriptor& G() {
    static const FormDescriptor g = g_form(20000);
    return g;
}

const ZeroSet& Z50() {
    static const ZeroSet z = build_zeroset(G(), 50.0);
    return z;
}

std::string temp_path(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "hiwl_test_zeros";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

ZeroSet three_zeros() {
    ZeroSet z{"g", 4, 0, 20.0, 3, {}};
    z.zeros = {{2.25, 12.939944611, ZeroKind::on_line, 3.1e-12, ZeroMethod::bisection, 5e-10},
               {1.2691791716512345, 8.9496290912345678, ZeroKind::off_line, 1.0e-14, ZeroMethod::newton, 2.9e-8},
               {3.2308208283487655, 8.9496290912345678, ZeroKind::off_line, 1.1e-14, ZeroMethod::newton, 2.9e-8}};
    std::sort(z.zeros.begin(), z.zeros.end(), [](const auto& a, const auto& b) { return a.gamma < b.gamma || (a.gamma == b.gamma && a.beta < b.beta); });
    return z;
}

} // namespace

TEST(ZFunction, EvenInT) {
    for (double t : {3.0, 17.5, 44.0}) EXPECT_EQ(z_scaled(G(), t), z_scaled(G(), -t));
}

TEST(ZFunction, ValueAtZero) {
    const cplx xi = xi_completed(G(), 2.25);
    EXPECT_EQ(z_function(G(), 0.0), xi.real());
    EXPECT_GT(xi.real(), 0.0);
}

TEST(ZFunction, RequiresRealCoefficients) {
    auto a = to_complex(g_coefficients_triangular(2000));
    a[3] += cplx(0.0, 1e-3);
    const auto f = make_form("complex", 4, 0, a);
    EXPECT_THROW(z_scaled(f, 10.0), domain_error);
}

TEST(ScanLine, EmptyInterval) { EXPECT_TRUE(scan_line(G(), 10.0, 10.0).empty()); }

TEST(ScanLine, ResidualsAreSmall) {
    const auto zs = scan_line(G(), 0.0, 50.0);
    ASSERT_FALSE(zs.empty());
    for (const auto& z : zs) {
        EXPECT_EQ(z.kind, ZeroKind::on_line);
        EXPECT_EQ(z.beta, 2.25);
        EXPECT_LE(z.residual, 1e-8) << z.gamma;
        EXPECT_LE(std::abs(l_eval(G(), cplx(2.25, z.gamma))), 1e-8);
        EXPECT_LE(z.uncertainty, 1e-9);
    }
}

TEST(ScanLine, StableUnderGridRefinement) {
    ZeroConfig fine;
    fine.scan_factor = 2.0;
    const auto a = scan_line(G(), 0.0, 50.0), b = scan_line(G(), 0.0, 50.0, fine);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i].gamma, b[i].gamma, 1e-8);
}

TEST(ScanLine, AgreesWithMinimumModulusScan) {
    // independent search: local minima of |L| on the line that dip near zero
    const auto zs = scan_line(G(), 5.0, 50.0);
    std::vector<double> minima;
    const double h = 0.005;
    double a = std::abs(l_eval(G(), cplx(2.25, 5.0))), b = std::abs(l_eval(G(), cplx(2.25, 5.0 + h)));
    for (double t = 5.0 + 2 * h; t <= 50.0; t += h) {
        const double c = std::abs(l_eval(G(), cplx(2.25, t)));
        if (b < a && b < c && b < 0.05) minima.push_back(t - h);
        a = b;
        b = c;
    }
    ASSERT_EQ(minima.size(), zs.size());
    for (std::size_t i = 0; i < zs.size(); ++i) EXPECT_NEAR(minima[i], zs[i].gamma, 2 * h);
}

TEST(CountBox, DominanceRegionIsEmpty) { EXPECT_EQ(count_box(G(), 4.25, 6.0, 0.5, 50.0), 0); }

TEST(CountBox, IsolatesOneZero) {
    const auto zs = scan_line(G(), 10.0, 20.0);
    ASSERT_FALSE(zs.empty());
    const double g = zs.front().gamma;
    EXPECT_EQ(count_box(G(), 2.2, 2.3, g - 0.05, g + 0.05), 1);
}

TEST(CountBox, Additive) {
    const long whole = count_box(G(), 0.25, 4.25, 0.0, 30.0);
    const long lower = count_box(G(), 0.25, 4.25, 0.0, 17.0);
    const long upper = count_box(G(), 0.25, 4.25, 17.0, 30.0);
    EXPECT_EQ(whole, lower + upper);
    const long left = count_box(G(), 0.25, 2.0, 0.0, 30.0);
    const long right = count_box(G(), 2.0, 4.25, 0.0, 30.0);
    EXPECT_EQ(whole, left + right);
}

TEST(CountBox, EmptyBoxRejected) { EXPECT_THROW(count_box(G(), 2.0, 2.0, 0.0, 1.0), domain_error); }

TEST(CountBox, DilatesAroundBoundaryZero) {
    // the top edge runs through an on-line zero; the dilated box still counts it
    const auto zs = scan_line(G(), 10.0, 14.0);
    ASSERT_FALSE(zs.empty());
    const double g = zs.front().gamma;
    EXPECT_EQ(count_box(G(), 2.0, 2.5, g - 0.1, g), 1);
}

TEST(LocateOffline, EmptyBox) { EXPECT_TRUE(locate_offline(G(), 2.3, 4.25, 0.5, 5.0).empty()); }

TEST(LocateOffline, FindsReflectedPairs) {
    const auto zs = locate_offline(G(), 2.251, 4.25, 0.5, 20.0);
    ASSERT_FALSE(zs.empty());
    ASSERT_EQ(zs.size() % 2, 0u);
    for (std::size_t i = 0; i < zs.size(); i += 2) {
        const auto& l = zs[i];
        const auto& r = zs[i + 1];
        EXPECT_EQ(l.gamma, r.gamma);
        EXPECT_NEAR(l.beta + r.beta, 4.5, 1e-6);
        EXPECT_LE(l.residual, 1e-8);
        EXPECT_LE(r.residual, 1e-8);
        // reflection plus conjugation
        const cplx rho(r.beta, r.gamma);
        EXPECT_LE(zero_residual(G(), 4.5 - std::conj(rho)), 1e-8);
        EXPECT_LE(std::abs(l_eval(G(), rho)), 1e-8);
    }
}

TEST(LocateOffline, RequiresRightHalf) { EXPECT_THROW(locate_offline(G(), 2.0, 3.0, 0.5, 5.0), domain_error); }

TEST(BuildZeroset, CompleteTo50) {
    const auto& z = Z50();
    EXPECT_TRUE(z.certified());
    const auto [s0, s1] = zero_strip(G());
    EXPECT_EQ(s0, 0.25);
    EXPECT_EQ(s1, 4.25);
    EXPECT_EQ(static_cast<long>(z.size()), count_box(G(), s0, s1, 0.0, z.T_max));
    EXPECT_TRUE(std::is_sorted(z.zeros.begin(), z.zeros.end(), [](const auto& a, const auto& b) { return a.gamma < b.gamma; }));
}

TEST(BuildZeroset, RecordInvariants) {
    for (const auto& r : Z50().zeros) {
        EXPECT_LE(r.residual, 1e-8);
        if (r.kind == ZeroKind::on_line) {
            EXPECT_LE(std::abs(r.beta - 2.25), r.uncertainty);
        }
        if (r.kind == ZeroKind::off_line) {
            const auto partner = std::find_if(Z50().zeros.begin(), Z50().zeros.end(), [&](const ZeroRecord& o) {
                return o.gamma == r.gamma && std::abs(o.beta + r.beta - 4.5) <= 1e-6;
            });
            EXPECT_NE(partner, Z50().zeros.end());
        }
    }
}

TEST(BuildZeroset, ZeroHeightIsEmpty) {
    const auto z = build_zeroset(G(), 0.0);
    EXPECT_TRUE(z.zeros.empty());
    EXPECT_EQ(z.box_count, 0);
}

TEST(BuildZeroset, ReusesCacheAndGrowsMonotonically) {
    std::ostringstream log;
    const auto z = build_zeroset(G(), 70.0, {}, &Z50(), &log);
    EXPECT_NE(log.str().find("reused N=" + std::to_string(Z50().size()) + " zeros"), std::string::npos);
    EXPECT_TRUE(z.certified());
    EXPECT_GE(z.size(), Z50().size());
    for (std::size_t i = 0; i < Z50().size(); ++i) EXPECT_EQ(z.zeros[i], Z50().zeros[i]);
    const auto fresh = build_zeroset(G(), 70.0);
    EXPECT_EQ(fresh.size(), z.size());
}

TEST(BuildZeroset, WorkerCountDoesNotChangeResult) {
    ZeroConfig two;
    two.workers = 2;
    const auto z = build_zeroset(G(), 30.0, two);
    const auto one = build_zeroset(G(), 30.0);
    EXPECT_EQ(z, one);
}

TEST(ZeroDatabase, RoundTripIsBitExact) {
    const auto z = three_zeros();
    const auto path = temp_path("roundtrip.csv");
    save_zeros(z, path);
    EXPECT_EQ(load_zeros(path), z);
    const auto big = Z50();
    save_zeros(big, path);
    EXPECT_EQ(load_zeros(path), big);
}

TEST(ZeroDatabase, HeaderFormat) {
    const auto text = serialize_zeros(three_zeros());
    EXPECT_EQ(text.rfind("# form=g k=4 ell=0 T_max=20 box_count=3 checksum=", 0), 0u);
    EXPECT_NE(text.find("\nbeta,gamma,kind,residual,method,uncertainty\n"), std::string::npos);
    EXPECT_EQ(text.find('\r'), std::string::npos);
}

TEST(ZeroDatabase, TruncatedFileIsRejected) {
    const auto text = serialize_zeros(three_zeros());
    std::istringstream in(text.substr(0, text.size() - 20));
    EXPECT_THROW(parse_zeros(in), format_error);
}

TEST(ZeroDatabase, TamperedFileIsRejected) {
    auto text = serialize_zeros(three_zeros());
    text[text.find("on-line") - 2] ^= 1;
    std::istringstream in(text);
    EXPECT_THROW(parse_zeros(in), format_error);
}

TEST(ZeroDatabase, SchemaMismatch) {
    std::istringstream in("# form=g k=4 ell=0 T_max=1 box_count=0 checksum=0\nbeta,gamma\n");
    EXPECT_THROW(parse_zeros(in), format_error);
    std::istringstream none("beta,gamma,kind,residual,method,uncertainty\n");
    EXPECT_THROW(parse_zeros(none), format_error);
}

TEST(ZeroDatabase, MissingFile) { EXPECT_THROW(load_zeros("/nonexistent/zeros.csv"), io_error); }

TEST(ZeroDatabase, AppendDeduplicates) {
    auto z = three_zeros();
    auto dup = z.zeros[0];
    dup.gamma += 5e-7;
    EXPECT_EQ(append_zeros(z, {dup}), 0u);
    EXPECT_EQ(z.size(), 3u);
    ZeroRecord other{2.25, 30.0, ZeroKind::on_line, 0.0, ZeroMethod::bisection, 0.0};
    EXPECT_EQ(append_zeros(z, {other}), 1u);
    EXPECT_EQ(z.zeros.back().gamma, 30.0);
}

TEST(ZeroDatabase, AtomicWriteLeavesNoTemporary) {
    const auto path = temp_path("atomic.csv");
    save_zeros(three_zeros(), path);
    EXPECT_FALSE(std::filesystem::exists(path + ".tmp"));
    EXPECT_THROW(save_zeros(three_zeros(), "/nonexistent/dir/z.csv"), io_error);
}

// Command-line driver: coefficients, evaluation, the zero database and the statistics suite.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hiwl/statistics.hpp"

namespace fs = std::filesystem;
using namespace hiwl;

namespace {

enum Exit : int { ok = 0, verdict_fail = 1, io_failure = 2, usage = 64 };

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string form = "g";
    int k = 4;
    int ell = 0;
    double T = 50.0;
    std::string out = ".";
    std::string cache;
    unsigned workers = 1;
    double eps = 1e-9;
    int h = 1;
    double eta = 0.75;
    double alpha = std::numeric_limits<double>::quiet_NaN();
    std::size_t table = 20000;
    std::size_t N = 20;
    std::string s;
    std::string method = "eval";
    bool k_set = false;
    bool ell_set = false;

    EvalConfig eval() const {
        EvalConfig c;
        c.target_eps = eps;
        c.h = h;
        c.eta = eta;
        c.alpha = alpha;
        return c;
    }

    ZeroConfig zeros() const {
        ZeroConfig z;
        z.workers = workers;
        z.eval = eval();
        return z;
    }
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw io_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void ensure_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw io_error("cannot create directory " + p.string());
}

void write_output(const RunConfig& rc, const std::string& name, const std::string& content) {
    ensure_dir(rc.out);
    detail::write_atomic((fs::path(rc.out) / name).string(), content);
}

fs::path cache_dir(const RunConfig& rc, const std::string& id, int k, int ell) {
    return fs::path(rc.cache) / (id + "_k" + std::to_string(k) + "_ell" + std::to_string(ell));
}

std::string coefficient_csv(const ExactCoefficients& a) {
    std::string out = "n,a\n";
    for (std::size_t n = 1; n <= a.size(); ++n) out += std::to_string(n) + "," + a(n).str() + "\n";
    return out;
}

std::vector<cplx> cached_g_coefficients(const RunConfig& rc) {
    if (rc.cache.empty()) return to_complex(g_coefficients_triangular(rc.table));
    const auto dir = cache_dir(rc, "g", 4, 0);
    const auto csv = dir / ("coeffs_" + std::to_string(rc.table) + ".csv");
    const auto sum = fs::path(csv.string() + ".fnv");
    if (fs::exists(csv) && fs::exists(sum)) {
        const std::string text = read_file(csv);
        if (hex64(fnv1a(text)) != read_file(sum)) throw format_error("coefficient cache checksum mismatch in " + csv.string());
        std::istringstream in(text);
        return parse_coefficients(in);
    }
    const std::string text = coefficient_csv(g_coefficients_triangular(rc.table));
    ensure_dir(dir);
    detail::write_atomic(csv.string(), text);
    detail::write_atomic(sum.string(), hex64(fnv1a(text)));
    std::istringstream in(text);
    return parse_coefficients(in);
}

FormDescriptor load_form(const RunConfig& rc) {
    if (rc.form == "g") {
        if ((rc.k_set && rc.k != 4) || (rc.ell_set && rc.ell != 0)) throw usage_error("the builtin form g has k=4 and ell=0");
        auto f = make_form("g", 4, 0, cached_g_coefficients(rc));
        return f;
    }
    if (!rc.k_set || !rc.ell_set) throw usage_error("coefficient-file forms need --k and --ell");
    auto a = load_coefficients(rc.form);
    if (a.size() < 2) throw format_error("coefficient file needs at least two rows");
    auto f = make_form(fs::path(rc.form).stem().string(), rc.k, rc.ell, std::move(a));
    if (f.normalization == NormalizationStatus::failed)
        std::cerr << "warning: normalization self-test failed for " << f.id << " (residual " << f.normalization_residual << ")\n";
    return f;
}

ZeroSet obtain_zeros(const RunConfig& rc, const FormDescriptor& f, double T) {
    std::optional<ZeroSet> cached;
    fs::path db;
    if (!rc.cache.empty()) {
        db = cache_dir(rc, f.id, f.k, f.ell) / "zeros.csv";
        if (fs::exists(db)) cached = load_zeros(db.string());
    }
    auto z = build_zeroset(f, T, rc.zeros(), cached ? &*cached : nullptr, &std::cerr);
    if (!rc.cache.empty() && (!cached || z.T_max > cached->T_max)) {
        ensure_dir(db.parent_path());
        save_zeros(z, db.string());
    }
    return z;
}

/// Zeros restricted to 0 < gamma < T.
ZeroSet restrict_zeros(const ZeroSet& z, double T) {
    ZeroSet out = z;
    out.zeros.clear();
    for (const auto& r : z.zeros)
        if (r.gamma < T) out.zeros.push_back(r);
    out.T_max = T;
    // a complete set stays complete below any height
    out.box_count = z.certified() ? static_cast<long>(out.zeros.size()) : -1;
    return out;
}

cplx parse_complex(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    static const std::regex full(R"(^([+-]?[0-9.]+(?:[eE][+-]?[0-9]+)?)(?:([+-])([0-9.]*(?:[eE][+-]?[0-9]+)?)[ij])?$)");
    static const std::regex imag_only(R"(^([+-]?[0-9.]*(?:[eE][+-]?[0-9]+)?)[ij]$)");
    std::smatch m;
    auto num = [&](const std::string& v) {
        if (v.empty() || v == "+") return 1.0;
        if (v == "-") return -1.0;
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw usage_error("bad number in --s: " + text);
        return d;
    };
    try {
        if (std::regex_match(s, m, full)) {
            const double re = num(m[1]);
            double im = 0.0;
            if (m[2].matched) im = (m[2] == "-" ? -1.0 : 1.0) * num(m[3]);
            return {re, im};
        }
        if (std::regex_match(s, m, imag_only)) return {0.0, num(m[1])};
    } catch (const std::invalid_argument&) {
    }
    throw usage_error("cannot parse complex number '" + text + "'");
}

std::string fmt(double v) { return format17(v); }

struct Collector {
    std::vector<StatReport> reports;
    void add(StatReport r) { reports.push_back(std::move(r)); }
    bool failed() const {
        return std::any_of(reports.begin(), reports.end(), [](const StatReport& r) { return r.verdict == Verdict::fail; });
    }
    std::string jsonl() const {
        std::string s;
        for (const auto& r : reports) s += r.to_json().dump() + "\n";
        return s;
    }
};

void weyl_section(const RunConfig& rc, const ZeroSet& z, Collector& col) {
    const double T = z.T_max;
    const auto g_full = ordinates(z, T), g_half = ordinates(z, T / 2.0);
    const std::string sum = zeroset_checksum(z);
    if (g_full.empty() || g_half.empty()) throw usage_error("weyl: no zeros below T/2; increase --T");
    std::string csv = "m,T,S_re,S_im,S_over_N\n";
    for (long m = 1; m <= 5; ++m)
        for (const auto* g : {&g_half, &g_full}) {
            const auto w = weyl_sum(*g, m);
            csv += std::to_string(m) + "," + fmt(g == &g_half ? T / 2.0 : T) + "," + fmt(w.S.real()) + "," + fmt(w.S.imag()) + "," +
                   fmt(w.S_over_N) + "\n";
        }
    write_output(rc, "weyl.csv", csv);
    const auto hist = fractional_histogram(g_full, 10);
    std::string hcsv = "bin,lo,hi,count\n";
    for (std::size_t j = 0; j < hist.size(); ++j)
        hcsv += std::to_string(j) + "," + fmt(j / 10.0) + "," + fmt((j + 1) / 10.0) + "," + std::to_string(hist[j]) + "\n";
    write_output(rc, "histogram.csv", hcsv);

    for (long m = 1; m <= 5; ++m) {
        const auto a = weyl_sum(g_half, m), b = weyl_sum(g_full, m);
        StatReport r{"weyl_S_over_N_m=" + std::to_string(m), T, static_cast<long>(g_full.size()), b.S_over_N, a.S_over_N, 0.0,
                     b.S_over_N < a.S_over_N ? Verdict::pass : Verdict::warn, sum};
        r.extra["S"] = {b.S.real(), b.S.imag()};
        col.add(r);
    }
    const double d_half = star_discrepancy(g_half), d_full = star_discrepancy(g_full);
    col.add({"star_discrepancy", T, static_cast<long>(g_full.size()), d_full, d_half, 0.0, d_full < d_half ? Verdict::pass : Verdict::warn, sum});
    const long mx = *std::max_element(hist.begin(), hist.end()), mn = *std::min_element(hist.begin(), hist.end());
    const double ratio = mn > 0 ? static_cast<double>(mx) / static_cast<double>(mn) : std::numeric_limits<double>::infinity();
    StatReport hr{"histogram_max_min_ratio", T, static_cast<long>(g_full.size()), std::isfinite(ratio) ? ratio : 1e300, 3.0, 0.0,
                  ratio <= 3.0 ? Verdict::pass : Verdict::warn, sum};
    hr.extra["bins"] = hist;
    col.add(hr);
}

void landau_section(const RunConfig& rc, const FormDescriptor& f, const ZeroSet& z, Collector& col) {
    const auto b = log_deriv_coeffs(f.coeffs.normalize(), std::min<std::size_t>(f.size(), 100));
    std::string csv = "x,T,observed,observed_imag,predicted,slack,verdict\n";
    for (double x : {2.0, 3.0, 0.5, 1.5}) {
        auto r = landau_verify(z, b, x, z.T_max);
        csv += fmt(x) + "," + fmt(r.T) + "," + fmt(r.observed.real()) + "," + fmt(r.observed.imag()) + "," + fmt(r.predicted) + "," +
               fmt(r.slack) + "," + to_string(r.verdict) + "\n";
        col.add(std::move(r));
    }
    write_output(rc, "landau.csv", csv);
}

void meansq_section(const RunConfig& rc, const FormDescriptor& f, double T, const std::string& checksum, Collector& col) {
    const auto ev = rc.eval();
    const double r_hat = coeff_mean_square(f.coeffs, static_cast<double>(f.size())).r_hat;
    const double r_reg = coeff_mean_square_regression(f.coeffs);
    std::string csv = "T,I,I_over_TlogT,dyadic,dyadic_over_TlogT,r_hat\n";
    double I_prev = 0.0, t_prev = 0.0, I_half = 0.0;
    for (double Ti : {T / 4.0, T / 2.0, T}) {
        const double I = I_prev + mean_square_line(f, t_prev, Ti, ev, 1e-3, rc.workers).value;
        const double dyadic = I - (Ti == T ? I_half : std::numeric_limits<double>::quiet_NaN());
        csv += fmt(Ti) + "," + fmt(I) + "," + fmt(I / (Ti * std::log(Ti))) + "," + fmt(dyadic) + "," + fmt(dyadic / (Ti * std::log(Ti))) +
               "," + fmt(r_hat) + "\n";
        if (Ti == T / 2.0) I_half = I;
        I_prev = I;
        t_prev = Ti;
    }
    write_output(rc, "meansq.csv", csv);
    const double ratio = I_prev / (T * std::log(T));
    StatReport r{"meansq_vs_r_hat", T, 0, ratio, r_hat, 0.35 * r_hat, std::abs(ratio - r_hat) <= 0.35 * r_hat ? Verdict::pass : Verdict::fail,
                 checksum};
    r.extra["r_hat_regression"] = r_reg;
    r.extra["I"] = I_prev;
    col.add(r);
    const double dy = (I_prev - I_half) / (T * std::log(T));
    col.add({"meansq_dyadic_vs_r_hat", T, 0, dy, r_hat, 0.35 * r_hat, std::abs(dy - r_hat) <= 0.35 * r_hat ? Verdict::pass : Verdict::warn, checksum});
}

void density_section(const ZeroSet& z, Collector& col) {
    const double T = z.T_max;
    // the [0.6, 1.4] band is calibrated at T = 200; below it the O(T) term dominates
    const double ratio = 2.0 * static_cast<double>(z.size()) / ((2.0 / detail::pi) * T * std::log(T));
    const bool in_band = ratio >= 0.6 && ratio <= 1.4;
    col.add({"zero_count_density", T, 2 * static_cast<long>(z.size()), ratio, 1.0, 0.4,
             in_band ? Verdict::pass : (T >= 200.0 ? Verdict::fail : Verdict::warn), zeroset_checksum(z)});
    const double n_full = 2.0 * static_cast<double>(ordinates(z, T).size()), n_half = 2.0 * static_cast<double>(ordinates(z, T / 2.0).size());
    const double d_full = density_sum(z, T) / n_full, d_half = density_sum(z, T / 2.0) / n_half;
    col.add({"density_sum_over_N", T, static_cast<long>(n_full), d_full, d_half, 0.0, d_full < d_half ? Verdict::pass : Verdict::warn,
             zeroset_checksum(z)});
}

void evaluator_section(const RunConfig& rc, const FormDescriptor& f, Collector& col) {
    const auto ev = rc.eval();
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> sig(f.critical_line() - 0.5, f.critical_line() + 0.5), tt(-50.0, 50.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const cplx s(sig(rng), tt(rng));
        const cplx a = xi_completed(f, s, ev), b = f.fricke_sign() * xi_completed(f, f.weight() - s, ev);
        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
    }
    col.add({"functional_equation_residual", 50.0, 100, worst, 0.0, 1e-9, worst <= 1e-9 ? Verdict::pass : Verdict::fail, ""});

    double afe = 0.0;
    for (int i = 0; i < 10; ++i) {
        const cplx s(f.critical_line(), 5.0 + 45.0 * i / 9.0);
        EvalConfig h2 = ev;
        h2.h = 2;
        const cplx x = l_via_xi(f, s, ev), a1 = l_afe(f, s, ev).value, a2 = l_afe(f, s, h2).value;
        afe = std::max({afe, std::abs(a1 - x) / std::abs(x), std::abs(a2 - x) / std::abs(x), std::abs(a1 - a2) / std::abs(x)});
    }
    col.add({"afe_concordance", 50.0, 10, afe, 0.0, 1e-6, afe <= 1e-6 ? Verdict::pass : Verdict::fail, ""});
}

void zeros_section(const ZeroSet& z, Collector& col) {
    const std::string sum = zeroset_checksum(z);
    col.add({"zero_completeness", z.T_max, z.box_count, static_cast<double>(z.size()), static_cast<double>(z.box_count), 0.0,
             z.certified() ? Verdict::pass : Verdict::fail, sum});
    long off = 0;
    double worst = 0.0;
    for (const auto& r : z.zeros) {
        off += r.kind == ZeroKind::off_line;
        worst = std::max(worst, r.residual);
    }
    StatReport rr{"zero_residual_max", z.T_max, static_cast<long>(z.size()), worst, 0.0, 1e-8, worst <= 1e-8 ? Verdict::pass : Verdict::fail, sum};
    rr.extra["off_line"] = off;
    col.add(rr);
}

int emit(const RunConfig& rc, const Collector& col, const std::string& name) {
    const std::string text = col.jsonl();
    std::cout << text;
    write_output(rc, name, text);
    return col.failed() ? verdict_fail : ok;
}

int run_coeffs(const RunConfig& rc) {
    if (rc.N < 1) throw usage_error("coeffs: --N must be >= 1");
    if (rc.form != "g") throw usage_error("coeffs: only the builtin form g can be generated");
    const auto a = g_coefficients_triangular(rc.N);
    write_output(rc, "coefficients.csv", coefficient_csv(a));
    for (std::size_t n = 1; n <= std::min<std::size_t>(10, a.size()); ++n) std::cout << n << "," << a(n).str() << "\n";
    return ok;
}

int run_eval(const RunConfig& rc) {
    if (rc.s.empty()) throw usage_error("eval: --s is required");
    const cplx s = parse_complex(rc.s);
    const auto f = load_form(rc);
    const auto ev = rc.eval();
    cplx v;
    if (rc.method == "eval") v = l_eval(f, s, ev);
    else if (rc.method == "xi") v = l_via_xi(f, s, ev);
    else if (rc.method == "direct") v = l_direct(f, s, ev.target_eps);
    else if (rc.method == "afe") {
        const auto r = l_afe(f, s, ev);
        v = r.value;
        for (std::size_t j = 0; j < r.terms.size(); ++j)
            std::cout << "J" << j + 1 << " = " << fmt(r.terms[j].real()) << " " << fmt(r.terms[j].imag()) << "\n";
        std::cout << "err_est = " << fmt(r.err_est) << "\n";
    } else {
        throw usage_error("eval: unknown --method " + rc.method);
    }
    std::cout << "L = " << fmt(v.real()) << " " << fmt(v.imag()) << "\n";
    return ok;
}

int run_zeros(const RunConfig& rc) {
    const auto f = load_form(rc);
    const auto z = obtain_zeros(rc, f, rc.T);
    write_output(rc, "zeros.csv", serialize_zeros(z));
    std::cerr << "zeros: N=" << z.size() << " box_count=" << z.box_count << " T_max=" << z.T_max << "\n";
    Collector col;
    zeros_section(z, col);
    return emit(rc, col, "zeros.jsonl");
}

int run_section(const RunConfig& rc, const std::string& section) {
    const auto f = load_form(rc);
    Collector col;
    if (section == "meansq") {
        meansq_section(rc, f, rc.T, "", col);
        return emit(rc, col, "meansq.jsonl");
    }
    const auto z = obtain_zeros(rc, f, rc.T);
    const auto zt = z.T_max > rc.T ? restrict_zeros(z, rc.T) : z;
    if (section == "weyl") weyl_section(rc, zt, col);
    else if (section == "landau") landau_section(rc, f, z, col);
    else if (section == "density") density_section(zt, col);
    else if (section == "report") {
        evaluator_section(rc, f, col);
        zeros_section(z, col);
        write_output(rc, "zeros.csv", serialize_zeros(z));
        weyl_section(rc, zt, col);
        landau_section(rc, f, z, col);
        meansq_section(rc, f, rc.T, zeroset_checksum(z), col);
        density_section(zt, col);
    }
    return emit(rc, col, section + ".jsonl");
}

} // namespace

int main(int argc, char** argv) {
    RunConfig rc;
    CLI::App app{"L-function zeros and statistics for half-integral weight cusp forms"};
    app.set_help_flag("--help", "print this help message and exit");
    app.config_formatter(std::make_shared<CLI::ConfigINI>());
    app.set_config("--config", "", "key=value configuration file; flags override it");
    app.require_subcommand(1, 1);
    app.fallthrough();
    app.add_option("--form", rc.form, "builtin 'g' or a coefficient CSV path");
    auto* k_opt = app.add_option("--k", rc.k, "weight parameter (weight k + 1/2)");
    auto* ell_opt = app.add_option("--ell", rc.ell, "Fricke sign exponent, 0 or 1")->check(CLI::Range(0, 1));
    app.add_option("--T", rc.T, "height")->check(CLI::NonNegativeNumber);
    app.add_option("--out", rc.out, "output directory");
    app.add_option("--cache", rc.cache, "cache directory");
    app.add_option("--workers", rc.workers, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--eps", rc.eps, "target accuracy")->check(CLI::PositiveNumber);
    app.add_option("--h", rc.h, "smoothing order")->check(CLI::IsMember({1, 2}));
    app.add_option("--eta", rc.eta, "left contour shift");
    app.add_option("--alpha", rc.alpha, "right contour abscissa");
    app.add_option("--table", rc.table, "coefficient table length")->check(CLI::Range(2, 2000000));

    app.add_option("--N", rc.N, "coeffs: number of coefficients");
    app.add_option("--s", rc.s, "eval: point, e.g. 2.25+10i");
    app.add_option("--method", rc.method, "eval: eval | xi | direct | afe");
    app.add_subcommand("coeffs", "write the coefficient table");
    app.add_subcommand("eval", "evaluate L(s)");
    for (const char* name : {"zeros", "weyl", "landau", "meansq", "density", "report"}) app.add_subcommand(name, std::string("run the ") + name + " section");

    try {
        app.parse(argc, argv);
    } catch (const CLI::FileError& e) {
        std::cerr << e.what() << "\n";
        return io_failure;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }
    rc.k_set = k_opt->count() > 0;
    rc.ell_set = ell_opt->count() > 0;

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "coeffs") return run_coeffs(rc);
        if (name == "eval") return run_eval(rc);
        if (name == "zeros") return run_zeros(rc);
        return run_section(rc, name);
    } catch (const usage_error& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return usage;
    } catch (const domain_error& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return usage;
    } catch (const io_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return io_failure;
    } catch (const format_error& e) {
        std::cerr << "bad input file: " << e.what() << "\n";
        return io_failure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return verdict_fail;
    }
}

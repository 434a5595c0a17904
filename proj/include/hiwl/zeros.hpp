#pragma once

// Zeros of L(s, f) in the critical strip: sign changes of the real-rotated completed
// function on the critical line, argument-principle box counts, Newton refinement of
// zeros off the line, and a CSV zero database with a checksum.

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hiwl/dirichlet.hpp"
#include "hiwl/evaluator.hpp"
#include "hiwl/parallel.hpp"

namespace hiwl {

enum class ZeroKind { on_line, off_line, trivial };
enum class ZeroMethod { bisection, newton };

inline const char* to_string(ZeroKind k) {
    switch (k) {
    case ZeroKind::on_line: return "on-line";
    case ZeroKind::off_line: return "off-line";
    case ZeroKind::trivial: return "trivial";
    }
    return "?";
}

inline const char* to_string(ZeroMethod m) { return m == ZeroMethod::bisection ? "bisection" : "newton"; }

struct ZeroRecord {
    double beta = 0.0;
    double gamma = 0.0;
    ZeroKind kind = ZeroKind::on_line;
    double residual = 0.0;
    ZeroMethod method = ZeroMethod::bisection;
    double uncertainty = 0.0;

    friend bool operator==(const ZeroRecord&, const ZeroRecord&) = default;
};

/// Zeros with 0 < gamma < T_max, each stored once; conjugates are implied.
struct ZeroSet {
    std::string form_id;
    int k = 0;
    int ell = 0;
    double T_max = 0.0;
    long box_count = 0;
    std::vector<ZeroRecord> zeros;

    std::size_t size() const noexcept { return zeros.size(); }
    bool certified() const noexcept { return static_cast<long>(zeros.size()) == box_count; }
    friend bool operator==(const ZeroSet&, const ZeroSet&) = default;
};

struct ZeroConfig {
    double residual_tol = 1e-8;
    double bisect_tol = 1e-9;
    double newton_tol = 1e-10;
    double min_boundary_modulus = 1e-6;
    double dilation = 1e-4;
    int max_retries = 5;
    int max_depth = 12;
    int max_newton = 50;
    int max_refine = 4;         ///< scan-step halvings tried when a chunk does not reconcile
    double scan_factor = 1.0;   ///< scan step = pi / (4 log(3 + t)) / scan_factor
    double chunk = 10.0;        ///< height of the boxes reconciled independently
    double offline_margin = 1e-3;  ///< off-line search starts at the critical line plus this
    double max_edge_step = 0.05;   ///< longest step of the argument tracking
    double strip_start = std::numeric_limits<double>::quiet_NaN();  ///< dominance grid start
    unsigned workers = 1;
    EvalConfig eval;
};

namespace detail {

/// log |pi^{-s} Gamma(s)| + pi |t| / 2
inline double log_gamma_factor_scaled(cplx s) {
    return (log_gamma(s) - s * std::log(pi)).real() + pi * std::abs(s.imag()) / 2.0;
}

} // namespace detail

/// |xi(s)| divided by |pi^{-c} Gamma(c)| at c = k/2 + 1/4 + i Im(s): equal to |L| on the
/// critical line and identical for s and its reflection k + 1/2 - conj(s).
inline double zero_residual(const FormDescriptor& f, cplx s, const EvalConfig& cfg = {}) {
    const XiValue xi = xi_scaled(f, s, cfg);
    return std::abs(xi.scaled) * std::exp(-detail::log_gamma_factor_scaled(cplx(f.critical_line(), s.imag())));
}

/// Hardy-type function exp(pi |t| / 2) xi(k/2 + 1/4 + it) rotated to the real axis.
inline double z_scaled(const FormDescriptor& f, double t, const EvalConfig& cfg = {}) {
    if (!f.real_coeffs) throw domain_error("z_function: form must have real coefficients");
    const cplx v = xi_scaled(f, cplx(f.critical_line(), t), cfg).scaled;
    const double kept = f.ell == 0 ? v.real() : v.imag();
    const double dropped = f.ell == 0 ? v.imag() : v.real();
    if (std::abs(dropped) > 1e-9 * std::max(std::abs(v), std::numeric_limits<double>::min()))
        throw convergence_error("z_function: completed function not real on the critical line at t = " + std::to_string(t));
    return kept;
}

/// Re xi (ell = 0) or Im xi (ell = 1) on the critical line; underflows past |t| ~ 450.
inline double z_function(const FormDescriptor& f, double t, const EvalConfig& cfg = {}) {
    return z_scaled(f, t, cfg) * std::exp(-detail::pi * std::abs(t) / 2.0);
}

/// On-line zeros in (t0, t1] from sign changes of z_function refined by bisection.
inline std::vector<ZeroRecord> scan_line(const FormDescriptor& f, double t0, double t1, const ZeroConfig& cfg = {}) {
    if (t0 < 0.0 || t1 < t0) throw domain_error("scan_line: need 0 <= t0 <= t1");
    std::vector<ZeroRecord> out;
    if (t1 == t0) return out;
    const double c = f.critical_line();
    auto Z = [&](double t) { return z_scaled(f, t, cfg.eval); };
    double t = t0;
    double zt = Z(t);
    while (t < t1) {
        const double step = detail::pi / (4.0 * std::log(3.0 + t)) / cfg.scan_factor;
        const double tn = std::min(t1, t + step);
        const double zn = Z(tn);
        if ((zt < 0.0) != (zn < 0.0) && zt != 0.0) {
            double lo = t, hi = tn, flo = zt, fhi = zn;
            while (hi - lo > cfg.bisect_tol) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                const double fm = Z(mid);
                if ((fm < 0.0) == (flo < 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                    fhi = fm;
                }
            }
            // one regula falsi step inside the final bracket
            const double gamma = flo == fhi ? 0.5 * (lo + hi) : lo - flo * (hi - lo) / (fhi - flo);
            ZeroRecord r{c, gamma, ZeroKind::on_line, zero_residual(f, cplx(c, gamma), cfg.eval), ZeroMethod::bisection,
                         0.5 * (hi - lo)};
            out.push_back(r);
        }
        t = tn;
        zt = zn;
    }
    return out;
}

namespace detail {

struct EdgeTrack {
    double arg = 0.0;
    double min_modulus = std::numeric_limits<double>::infinity();  // of |L| along the edge
};

/// Continuous change of arg xi along the segment a -> b, stepping so that consecutive
/// phases differ by less than pi/4.
inline EdgeTrack track_edge(const FormDescriptor& f, cplx a, cplx b, const ZeroConfig& cfg) {
    EdgeTrack out;
    const double len = std::abs(b - a);
    if (len == 0.0) return out;
    auto eval = [&](double u, cplx& v) {
        const cplx s = a + (b - a) * u;
        v = xi_scaled(f, s, cfg.eval).scaled;
        out.min_modulus = std::min(out.min_modulus, std::abs(v) * std::exp(-log_gamma_factor_scaled(s)));
    };
    const double max_du = std::min(1.0, cfg.max_edge_step / len);
    const double min_du = 1e-13 / std::max(1.0, len);
    double u = 0.0, du = max_du;
    cplx prev;
    eval(0.0, prev);
    while (u < 1.0) {
        const double un = std::min(1.0, u + du);
        cplx cur;
        eval(un, cur);
        const double d = std::arg(cur / prev);
        if (std::abs(d) > pi / 4.0 && du > min_du) {
            du *= 0.5;
            continue;
        }
        out.arg += d;
        prev = cur;
        u = un;
        du = std::min(max_du, du * 2.0);
    }
    return out;
}

struct Winding {
    double turns;
    double min_modulus;
};

inline Winding winding(const FormDescriptor& f, double s0, double s1, double t0, double t1, const ZeroConfig& cfg) {
    const cplx p00(s0, t0), p10(s1, t0), p11(s1, t1), p01(s0, t1);
    double total = 0.0, mn = std::numeric_limits<double>::infinity();
    for (auto [a, b] : {std::pair{p00, p10}, std::pair{p10, p11}, std::pair{p11, p01}, std::pair{p01, p00}}) {
        const auto e = track_edge(f, a, b, cfg);
        total += e.arg;
        mn = std::min(mn, e.min_modulus);
    }
    return {total / (2.0 * pi), mn};
}

inline bool winding_ok(const Winding& w, const ZeroConfig& cfg) {
    return w.min_modulus >= cfg.min_boundary_modulus && std::abs(w.turns - std::round(w.turns)) < 0.05;
}

} // namespace detail

/// Number of zeros of xi inside [sigma0, sigma1] x [t0, t1] by the argument principle.
/// A box whose boundary passes within min_boundary_modulus of a zero is dilated and retried.
inline long count_box(const FormDescriptor& f, double sigma0, double sigma1, double t0, double t1,
                      const ZeroConfig& cfg = {}) {
    if (!(sigma0 < sigma1) || !(t0 < t1)) throw domain_error("count_box: empty box");
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        const double d = cfg.dilation * attempt;
        const auto w = detail::winding(f, sigma0 - d, sigma1 + d, t0 - d, t1 + d, cfg);
        if (detail::winding_ok(w, cfg)) return std::lround(w.turns);
    }
    throw convergence_error("count_box: zero on the boundary persists after dilation");
}

/// Strip [k + 1/2 - B, B] containing every nontrivial zero, or the unit strip around the
/// critical line when the dominance abscissa is close enough.
inline std::pair<double, double> zero_strip(const FormDescriptor& f, const ZeroConfig& cfg = {}) {
    const double B = dominance_abscissa(f.coeffs.normalize(), cfg.strip_start);
    const double c = f.critical_line();
    if (B <= f.k / 2.0 + 1.25) return {c - 1.0, c + 1.0};
    return {f.weight() - B, B};
}

namespace detail {

/// Newton iteration on L from `start`; converged when the normalized residual reaches tol.
inline std::optional<ZeroRecord> newton_zero(const FormDescriptor& f, cplx start, const ZeroConfig& cfg) {
    cplx s = start;
    double last_step = std::numeric_limits<double>::infinity();
    for (int it = 0; it < cfg.max_newton; ++it) {
        const cplx v = l_eval(f, s, cfg.eval);
        const double res = zero_residual(f, s, cfg.eval);
        if (res <= cfg.newton_tol || last_step < 1e-14 * std::abs(s)) {
            if (res > cfg.residual_tol) return std::nullopt;
            return ZeroRecord{s.real(), s.imag(), ZeroKind::off_line, res, ZeroMethod::newton,
                              std::isfinite(last_step) ? last_step : 0.0};
        }
        const auto d = l_derivative(f, s, cfg.eval);
        if (d.value == cplx(0.0)) return std::nullopt;
        const cplx step = v / d.value;
        last_step = std::abs(step);
        s -= step;
        if (std::abs(s - start) > 1.0) return std::nullopt;
    }
    return std::nullopt;
}

inline void locate_recursive(const FormDescriptor& f, double s0, double s1, double t0, double t1, long count, int depth,
                             const ZeroConfig& cfg, std::vector<ZeroRecord>& out) {
    if (count == 0) return;
    if (count == 1) {
        const cplx centre(0.5 * (s0 + s1), 0.5 * (t0 + t1));
        if (auto z = newton_zero(f, centre, cfg)) {
            const double pad = 1e-9;
            if (z->beta >= s0 - pad && z->beta <= s1 + pad && z->gamma >= t0 - pad && z->gamma <= t1 + pad) {
                out.push_back(*z);
                return;
            }
        }
    }
    if (depth >= cfg.max_depth) throw convergence_error("locate_offline: unreconciled count after maximal depth");
    const double sm = 0.5 * (s0 + s1), tm = 0.5 * (t0 + t1);
    const std::array<std::array<double, 4>, 4> quads = {{{s0, sm, t0, tm}, {sm, s1, t0, tm}, {s0, sm, tm, t1}, {sm, s1, tm, t1}}};
    long seen = 0;
    for (std::size_t q = 0; q < 4; ++q) {
        const auto& b = quads[q];
        // the last quadrant follows from additivity
        const long c = q == 3 ? count - seen : count_box(f, b[0], b[1], b[2], b[3], cfg);
        seen += c;
        if (c < 0) throw convergence_error("locate_offline: inconsistent sub-box counts");
        locate_recursive(f, b[0], b[1], b[2], b[3], c, depth + 1, cfg, out);
    }
}

} // namespace detail

/// Zeros in a box right of the critical line by quadrisection and Newton, each paired with
/// its reflection k + 1/2 - beta + i gamma, which is verified by evaluation.
inline std::vector<ZeroRecord> locate_offline(const FormDescriptor& f, double sigma0, double sigma1, double t0, double t1,
                                              const ZeroConfig& cfg = {}) {
    if (!(sigma0 > f.critical_line())) throw domain_error("locate_offline: box must lie right of the critical line");
    const long n = count_box(f, sigma0, sigma1, t0, t1, cfg);
    std::vector<ZeroRecord> right;
    detail::locate_recursive(f, sigma0, sigma1, t0, t1, n, 0, cfg, right);
    std::vector<ZeroRecord> out;
    for (const auto& z : right) {
        ZeroRecord mirror = z;
        mirror.beta = f.weight() - z.beta;
        mirror.residual = zero_residual(f, cplx(mirror.beta, mirror.gamma), cfg.eval);
        if (mirror.residual > cfg.residual_tol)
            throw convergence_error("locate_offline: reflected zero fails verification at gamma = " + std::to_string(z.gamma));
        out.push_back(mirror);
        out.push_back(z);
    }
    return out;
}

namespace detail {

struct ChunkResult {
    std::vector<ZeroRecord> zeros;
    long count = 0;
};

inline ChunkResult reconcile_chunk(const FormDescriptor& f, double s0, double s1, double t0, double t1, const ZeroConfig& cfg) {
    const double c = f.critical_line();
    const auto total = winding(f, s0, s1, t0, t1, cfg);
    if (!winding_ok(total, cfg)) throw convergence_error("build_zeroset: chunk boundary too close to a zero");
    const long n = std::lround(total.turns);
    const auto off = locate_offline(f, c + cfg.offline_margin, s1, t0, t1, cfg);
    ZeroConfig scan = cfg;
    for (int r = 0; r <= cfg.max_refine; ++r) {
        auto on = scan_line(f, t0, t1, scan);
        if (static_cast<long>(on.size() + off.size()) == n) {
            on.insert(on.end(), off.begin(), off.end());
            return {std::move(on), n};
        }
        scan.scan_factor *= 2.0;
    }
    throw convergence_error("build_zeroset: reconciliation failure on t in [" + std::to_string(t0) + ", " +
                            std::to_string(t1) + "]");
}

/// Moves t upward until the horizontal edge at height t stays clear of zeros.
inline double clear_height(const FormDescriptor& f, double s0, double s1, double t, const ZeroConfig& cfg) {
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        const double tt = t + cfg.dilation * attempt;
        if (track_edge(f, cplx(s0, tt), cplx(s1, tt), cfg).min_modulus >= cfg.min_boundary_modulus) return tt;
    }
    throw convergence_error("build_zeroset: no clear horizontal edge near t = " + std::to_string(t));
}

} // namespace detail

/// Certified zero set up to height T. Zeros below the coverage of `cache` are reused.
inline ZeroSet build_zeroset(const FormDescriptor& f, double T, const ZeroConfig& cfg = {}, const ZeroSet* cache = nullptr,
                             std::ostream* log = nullptr) {
    if (T < 0.0) throw domain_error("build_zeroset: T must be nonnegative");
    ZeroSet out{f.id, f.k, f.ell, 0.0, 0, {}};
    if (T == 0.0) return out;
    if (cache && (cache->form_id != f.id || cache->k != f.k || cache->ell != f.ell)) cache = nullptr;
    if (cache && cache->certified()) {
        out = *cache;
        if (log) *log << "reused N=" << cache->size() << " zeros below T=" << cache->T_max << "\n";
        if (cache->T_max >= T) return out;
    }
    const auto [s0, s1] = zero_strip(f, cfg);
    std::vector<double> edges{out.T_max};
    for (double t = out.T_max + cfg.chunk; t < T; t += cfg.chunk) edges.push_back(t);
    edges.push_back(T);
    for (std::size_t i = 1; i < edges.size(); ++i) edges[i] = detail::clear_height(f, s0, s1, edges[i], cfg);

    std::vector<detail::ChunkResult> parts(edges.size() - 1);
    parallel_for(parts.size(), cfg.workers,
                 [&](std::size_t i) { parts[i] = detail::reconcile_chunk(f, s0, s1, edges[i], edges[i + 1], cfg); });
    for (auto& p : parts) {
        out.box_count += p.count;
        out.zeros.insert(out.zeros.end(), p.zeros.begin(), p.zeros.end());
    }
    std::sort(out.zeros.begin(), out.zeros.end(),
              [](const ZeroRecord& a, const ZeroRecord& b) { return a.gamma != b.gamma ? a.gamma < b.gamma : a.beta < b.beta; });
    out.T_max = edges.back();
    return out;
}

/// Adds records, skipping any within 1e-6 of a stored zero in both coordinates.
inline std::size_t append_zeros(ZeroSet& set, const std::vector<ZeroRecord>& more) {
    std::size_t added = 0;
    for (const auto& z : more) {
        const bool dup = std::any_of(set.zeros.begin(), set.zeros.end(), [&](const ZeroRecord& y) {
            return std::abs(y.gamma - z.gamma) <= 1e-6 && std::abs(y.beta - z.beta) <= 1e-6;
        });
        if (dup) continue;
        set.zeros.push_back(z);
        ++added;
    }
    std::sort(set.zeros.begin(), set.zeros.end(),
              [](const ZeroRecord& a, const ZeroRecord& b) { return a.gamma != b.gamma ? a.gamma < b.gamma : a.beta < b.beta; });
    return added;
}

// ---- database file --------------------------------------------------------------------

inline std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

namespace detail {

inline constexpr const char* zero_header = "beta,gamma,kind,residual,method,uncertainty";

inline std::string zero_body(const ZeroSet& z) {
    std::string body = std::string(zero_header) + "\n";
    for (const auto& r : z.zeros) {
        body += format17(r.beta) + "," + format17(r.gamma) + "," + to_string(r.kind) + "," + format17(r.residual) + "," +
                to_string(r.method) + "," + format17(r.uncertainty) + "\n";
    }
    return body;
}

/// Writes through a temporary file in the same directory and renames it into place.
inline void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw io_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw io_error("cannot rename into " + path);
    }
}

inline double parse_field(const std::string& s, const char* what) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw format_error(std::string("zero database: bad ") + what + " '" + s + "'");
    return v;
}

} // namespace detail

inline std::string zeroset_checksum(const ZeroSet& z) { return hex64(fnv1a(detail::zero_body(z))); }

inline std::string serialize_zeros(const ZeroSet& z) {
    std::ostringstream head;
    head << "# form=" << z.form_id << " k=" << z.k << " ell=" << z.ell << " T_max=" << format17(z.T_max)
         << " box_count=" << z.box_count << " checksum=" << zeroset_checksum(z) << "\n";
    return head.str() + detail::zero_body(z);
}

inline void save_zeros(const ZeroSet& z, const std::string& path) { detail::write_atomic(path, serialize_zeros(z)); }

inline ZeroSet parse_zeros(std::istream& in) {
    std::string meta;
    if (!std::getline(in, meta) || meta.rfind("# ", 0) != 0) throw format_error("zero database: missing header comment");
    ZeroSet z;
    std::string checksum;
    {
        std::istringstream ms(meta.substr(2));
        for (std::string kv; ms >> kv;) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw format_error("zero database: bad header field '" + kv + "'");
            const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
            if (key == "form") z.form_id = val;
            else if (key == "k") z.k = static_cast<int>(detail::parse_field(val, "k"));
            else if (key == "ell") z.ell = static_cast<int>(detail::parse_field(val, "ell"));
            else if (key == "T_max") z.T_max = detail::parse_field(val, "T_max");
            else if (key == "box_count") z.box_count = static_cast<long>(detail::parse_field(val, "box_count"));
            else if (key == "checksum") checksum = val;
        }
    }
    if (checksum.empty()) throw format_error("zero database: header lacks a checksum");
    std::string line;
    if (!std::getline(in, line) || line != detail::zero_header) throw format_error("zero database: schema mismatch");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
        if (f.size() != 6) throw format_error("zero database: expected 6 fields in '" + line + "'");
        ZeroRecord r;
        r.beta = detail::parse_field(f[0], "beta");
        r.gamma = detail::parse_field(f[1], "gamma");
        if (f[2] == "on-line") r.kind = ZeroKind::on_line;
        else if (f[2] == "off-line") r.kind = ZeroKind::off_line;
        else if (f[2] == "trivial") r.kind = ZeroKind::trivial;
        else throw format_error("zero database: unknown kind '" + f[2] + "'");
        r.residual = detail::parse_field(f[3], "residual");
        if (f[4] == "bisection") r.method = ZeroMethod::bisection;
        else if (f[4] == "newton") r.method = ZeroMethod::newton;
        else throw format_error("zero database: unknown method '" + f[4] + "'");
        r.uncertainty = detail::parse_field(f[5], "uncertainty");
        z.zeros.push_back(r);
    }
    if (zeroset_checksum(z) != checksum) throw format_error("zero database: checksum mismatch");
    return z;
}

inline ZeroSet load_zeros(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open zero database " + path);
    return parse_zeros(in);
}

} // namespace hiwl

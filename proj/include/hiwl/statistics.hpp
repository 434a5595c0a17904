#pragma once

// Statistics of zero ordinates and mean values: Weyl sums, fractional-part histograms,
// star discrepancy, Landau's explicit formula, second moments, and the density sum.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "hiwl/dirichlet.hpp"
#include "hiwl/evaluator.hpp"
#include "hiwl/parallel.hpp"
#include "hiwl/zeros.hpp"

namespace hiwl {

enum class Verdict { pass, warn, fail };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::warn: return "warn";
    case Verdict::fail: return "fail";
    }
    return "?";
}

struct StatReport {
    std::string metric;
    double T = 0.0;
    long N = 0;
    cplx observed;
    double predicted = 0.0;
    double slack = 0.0;
    Verdict verdict = Verdict::pass;
    std::string zeroset_checksum;
    nlohmann::json extra = nlohmann::json::object();  ///< config and diagnostics

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["metric"] = metric;
        j["T"] = T;
        j["N"] = N;
        if (observed.imag() == 0.0) j["observed"] = observed.real();
        else j["observed"] = {observed.real(), observed.imag()};
        j["predicted"] = predicted;
        j["slack"] = slack;
        j["verdict"] = to_string(verdict);
        j["zeroset_checksum"] = zeroset_checksum;
        for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
        return j;
    }
};

inline nlohmann::json to_json(const EvalConfig& c) {
    return {{"x", c.x}, {"h", c.h}, {"eta", c.eta}, {"alpha", std::isnan(c.alpha) ? nlohmann::json(nullptr) : nlohmann::json(c.alpha)},
            {"quad_step", c.quad_step}, {"target_eps", c.target_eps}, {"t_small", c.t_small}};
}

/// Positive ordinates below T.
inline std::vector<double> ordinates(const ZeroSet& z, double T = std::numeric_limits<double>::infinity()) {
    std::vector<double> g;
    for (const auto& r : z.zeros)
        if (r.gamma > 0.0 && r.gamma < T) g.push_back(r.gamma);
    return g;
}

struct WeylSum {
    cplx S;
    double S_over_N;
};

inline WeylSum weyl_sum(std::span<const double> gammas, long m) {
    if (m == 0) throw domain_error("weyl_sum: m must be nonzero");
    if (gammas.empty()) throw domain_error("weyl_sum: empty ordinate list");
    std::vector<cplx> terms(gammas.size());
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        // reduce mod 1 first so large ordinates keep their fractional accuracy
        const double frac = gammas[i] - std::floor(gammas[i]);
        terms[i] = std::polar(1.0, 2.0 * detail::pi * static_cast<double>(m) * frac);
    }
    const cplx S = pairwise_sum<cplx>(terms);
    return {S, std::abs(S) / static_cast<double>(gammas.size())};
}

inline WeylSum weyl_sum(const ZeroSet& z, long m) { return weyl_sum(ordinates(z), m); }

inline std::vector<long> fractional_histogram(std::span<const double> gammas, std::size_t bins) {
    if (bins < 1) throw domain_error("fractional_histogram: need at least one bin");
    std::vector<long> h(bins, 0);
    for (double g : gammas) {
        const double u = g - std::floor(g);
        auto j = static_cast<std::size_t>(u * static_cast<double>(bins));
        h[std::min(j, bins - 1)]++;
    }
    return h;
}

/// Exact star discrepancy of points in [0, 1).
inline double star_discrepancy_unit(std::vector<double> u) {
    if (u.empty()) throw domain_error("star_discrepancy: need at least one point");
    std::sort(u.begin(), u.end());
    const auto n = static_cast<double>(u.size());
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double k = static_cast<double>(i + 1);
        d = std::max({d, k / n - u[i], u[i] - (k - 1.0) / n});
    }
    return d;
}

/// Star discrepancy of the fractional parts of the ordinates.
inline double star_discrepancy(std::span<const double> gammas) {
    std::vector<double> u;
    u.reserve(gammas.size());
    for (double g : gammas) u.push_back(g - std::floor(g));
    return star_discrepancy_unit(std::move(u));
}

struct LandauPrediction {
    double value = 0.0;      ///< main term including the factor T
    bool exact_match = false;
    std::size_t lambda = 0;  ///< the matching integer (x or 1/x), 0 if none
};

/// Main term (b(d)/pi)(delta_{x,d} - x^{k+1/2} delta_{x,1/d}) T with d over the integers >= 2.
inline LandauPrediction landau_main_term(const LogDerivTable& b, double weight, double x, double T) {
    if (!(x > 0.0) || x == 1.0) throw domain_error("landau: x must be positive and different from 1");
    LandauPrediction out;
    auto match = [](double v) -> std::size_t {
        const double r = std::round(v);
        return (r >= 2.0 && std::abs(v - r) <= 1e-12 * r) ? static_cast<std::size_t>(r) : 0;
    };
    if (const auto d = match(x); d != 0) {
        if (d > b.b.size()) throw domain_error("landau: log-derivative table too short for x");
        out = {b(d).real() / detail::pi * T, true, d};
    } else if (const auto d2 = match(1.0 / x); d2 != 0) {
        if (d2 > b.b.size()) throw domain_error("landau: log-derivative table too short for 1/x");
        out = {-std::pow(x, weight) * b(d2).real() / detail::pi * T, true, d2};
    }
    return out;
}

/// sum over zeros with |gamma| < T of x^rho, conjugates included; passes when within
/// 0.2 max(|predicted|, T) of the main term and real to 1e-6 relative.
inline StatReport landau_verify(const ZeroSet& z, const LogDerivTable& b, double x, double T) {
    if (!z.certified() || z.T_max < T) throw domain_error("landau_verify: zero set not certified up to T");
    const double weight = z.k + 0.5;
    const auto pred = landau_main_term(b, weight, x, T);
    std::vector<cplx> terms;
    const double lx = std::log(x);
    for (const auto& r : z.zeros) {
        if (!(r.gamma > 0.0 && r.gamma < T)) continue;
        const double mod = std::exp(r.beta * lx);
        const double ph = r.gamma * lx;
        terms.push_back(cplx(mod * std::cos(ph), mod * std::sin(ph)));
        terms.push_back(cplx(mod * std::cos(ph), -mod * std::sin(ph)));
    }
    const cplx obs = pairwise_sum<cplx>(terms);
    StatReport rep;
    rep.metric = "landau_x=" + format17(x);
    rep.T = T;
    rep.N = static_cast<long>(terms.size());
    rep.observed = obs;
    rep.predicted = pred.value;
    rep.slack = 0.2 * std::max(std::abs(pred.value), T);
    rep.zeroset_checksum = zeroset_checksum(z);
    const double imag_rel = std::abs(obs.imag()) / std::max(std::abs(obs), 1.0);
    rep.extra["imag_relative"] = imag_rel;
    rep.extra["slack_constant"] = std::abs(obs.real() - pred.value) / std::log(T);
    rep.extra["exact_match"] = pred.exact_match;
    if (pred.exact_match) rep.extra["lambda"] = pred.lambda;
    const bool ok = std::abs(obs.real() - pred.value) <= rep.slack && imag_rel <= 1e-6;
    rep.verdict = ok ? Verdict::pass : Verdict::fail;
    return rep;
}

struct MeanSquare {
    double value = 0.0;
    double change = 0.0;  ///< relative change at the last halving
    double step = 0.0;
};

/// int_a^b |L(k/2 + 1/4 + it)|^2 dt by composite Simpson from step 0.04, halved until the
/// relative change drops below rel_tol (at least one halving, final step <= 0.02).
inline MeanSquare mean_square_line(const FormDescriptor& f, double a, double b, const EvalConfig& cfg = {},
                                   double rel_tol = 1e-3, unsigned workers = 1) {
    if (b < a) throw domain_error("mean_square_line: need a <= b");
    if (b == a) return {};
    const double c = f.critical_line();
    auto sample = [&](std::size_t n) {
        // values at a + i (b - a) / n
        std::vector<double> v(n + 1);
        parallel_for(n + 1, workers, [&](std::size_t i) {
            const double t = a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
            v[i] = std::norm(l_via_xi(f, cplx(c, t), cfg));
        });
        return v;
    };
    auto simpson = [&](const std::vector<double>& v) {
        const std::size_t n = v.size() - 1;
        std::vector<double> w(v.size());
        for (std::size_t i = 0; i <= n; ++i) w[i] = v[i] * ((i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0));
        return pairwise_sum<double>(w) * (b - a) / static_cast<double>(n) / 3.0;
    };
    auto n = static_cast<std::size_t>(std::ceil((b - a) / 0.04));
    n += n % 2;
    n = std::max<std::size_t>(n, 2);
    double prev = simpson(sample(n));
    for (int it = 0; it < 8; ++it) {
        n *= 2;
        const double next = simpson(sample(n));
        const double change = std::abs(next - prev) / std::max(std::abs(next), 1e-300);
        prev = next;
        if (change < rel_tol) return {next, change, (b - a) / static_cast<double>(n)};
    }
    throw convergence_error("mean_square_line: quadrature did not settle");
}

inline MeanSquare mean_square_line(const FormDescriptor& f, double T, const EvalConfig& cfg = {}) {
    return mean_square_line(f, 0.0, T, cfg);
}

struct CoeffMeanSquare {
    double sum;
    double r_hat;
};

/// sum_{n <= x} |a(n)|^2 and r_hat = (2k + 1) sum / (2 x^{k + 1/2}).
inline CoeffMeanSquare coeff_mean_square(const CoefficientTable& table, double x) {
    if (x > static_cast<double>(table.size())) throw domain_error("coeff_mean_square: x exceeds table length");
    if (x < 1.0) throw domain_error("coeff_mean_square: x must be >= 1");
    const auto n = static_cast<std::size_t>(std::floor(x));
    std::vector<double> sq(n);
    for (std::size_t i = 1; i <= n; ++i) sq[i - 1] = std::norm(table(i));
    const double sum = pairwise_sum<double>(sq);
    const double k = table.k();
    return {sum, (2.0 * k + 1.0) * sum / (2.0 * std::pow(x, k + 0.5))};
}

/// Least-squares r over the ladder x = N, N/2, ..., down to N/2^(levels-1).
inline double coeff_mean_square_regression(const CoefficientTable& table, int levels = 6) {
    double acc = 0.0;
    int used = 0;
    double x = static_cast<double>(table.size());
    for (int i = 0; i < levels && x >= 1.0; ++i, x = std::floor(x / 2.0)) {
        acc += coeff_mean_square(table, x).r_hat;
        ++used;
    }
    return acc / used;
}

/// sum over zeros with |gamma| < T of |beta - (k/2 + 1/4)|, conjugates included.
inline double density_sum(const ZeroSet& z, double T) {
    const double c = z.k / 2.0 + 0.25;
    std::vector<double> terms;
    for (const auto& r : z.zeros)
        if (r.gamma > 0.0 && r.gamma < T) terms.push_back(2.0 * std::abs(r.beta - c));
    return pairwise_sum<double>(terms);
}

} // namespace hiwl

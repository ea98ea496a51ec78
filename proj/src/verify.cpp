#include "erl/verify.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <set>

#include <fmt/format.h>

#include "erl/entropy.hpp"
#include "erl/error.hpp"
#include "erl/info.hpp"
#include "erl/mean_dimension.hpp"
#include "erl/measure.hpp"
#include "erl/parallel.hpp"
#include "erl/rate_distortion.hpp"

namespace erl {

using nlohmann::json;

const char* to_string(ClaimStatus status) noexcept {
    switch (status) {
        case ClaimStatus::Pass: return "pass";
        case ClaimStatus::Fail: return "fail";
        case ClaimStatus::Indeterminate: return "indeterminate";
    }
    return "?";
}

bool ScenarioReport::passed() const {
    return !claims.empty() &&
           std::all_of(claims.begin(), claims.end(), [](const Claim& c) { return c.status == ClaimStatus::Pass; });
}

json ScenarioReport::to_json(bool timing) const {
    json j;
    j["scenario"] = id;
    j["params"] = params;
    j["passed"] = passed();
    j["claims"] = json::array();
    for (const auto& c : claims)
        j["claims"].push_back({{"description", c.description},
                               {"anchor", c.anchor},
                               {"values", c.values},
                               {"tolerance", c.tolerance},
                               {"status", to_string(c.status)}});
    j["trail"] = trail;
    if (timing) j["wall_seconds"] = wall_seconds;
    return j;
}

std::string ScenarioReport::to_text(bool timing) const {
    std::string out = fmt::format("scenario {}: {}\n", id, passed() ? "PASS" : "FAIL");
    for (const auto& c : claims)
        out += fmt::format("  [{}] {} (tol {}) :: {}\n      values {}\n", to_string(c.status), c.description,
                           c.tolerance, c.anchor, c.values.dump());
    out += "  trail:\n";
    for (const auto& t : trail) out += "    " + t + "\n";
    if (timing) out += fmt::format("  wall time {:.2f} s\n", wall_seconds);
    return out;
}

const std::vector<std::string>& scenario_ids() {
    static const std::vector<std::string> ids{"bernoulli-thm12", "markov-thm12",      "mixture-thm12",
                                              "mrid-idr-thm11",  "hilbert-cube-ex24", "rd-inequality-21",
                                              "lemma31-chain",   "step-inequalities"};
    return ids;
}

namespace {

// Reads parameters with defaults, records the effective values and rejects
// keys nobody asked for.
class Params {
public:
    explicit Params(const json& given) : given_(given.is_null() ? json::object() : given) {
        if (!given_.is_object()) throw Error(ErrorCode::Config, "scenario params must be a JSON object");
    }

    template <class T>
    T get(const std::string& key, const T& fallback) {
        used_.insert(key);
        T value = fallback;
        if (given_.contains(key)) {
            try {
                value = given_.at(key).get<T>();
            } catch (const json::exception& e) {
                throw Error(ErrorCode::Config, "parameter '" + key + "': " + e.what());
            }
        }
        effective_[key] = value;
        return value;
    }

    json finish() const {
        for (const auto& [k, v] : given_.items())
            if (!used_.count(k)) throw Error(ErrorCode::Config, "unknown scenario parameter '" + k + "'");
        return effective_;
    }

private:
    json given_;
    json effective_ = json::object();
    std::set<std::string> used_;
};

std::vector<double> dyadic(const std::vector<int>& exponents) {
    std::vector<double> g;
    for (int j : exponents) g.push_back(std::ldexp(1.0, -j));
    return g;
}

std::vector<std::size_t> powers_of_two(const std::vector<int>& exponents) {
    std::vector<std::size_t> g;
    for (int j : exponents) {
        if (j < 1 || j > 20) throw Error(ErrorCode::Config, "cell exponent out of range");
        g.push_back(std::size_t{1} << j);
    }
    return g;
}

ClaimStatus verdict(bool ok) { return ok ? ClaimStatus::Pass : ClaimStatus::Fail; }

auto binary_full() { return std::make_shared<const ShiftSystem>(ShiftSystem::full(2)); }

// ---------------------------------------------------------------------------
// The four rate-distortion entropies against the Kolmogorov-Sinai entropy
// ---------------------------------------------------------------------------

struct FourEntropyDefaults {
    std::vector<int> eps_exponents{4, 6, 8, 10};
    std::vector<int> bowen_exponents{4, 6, 8, 10};
    std::vector<std::size_t> n{1, 2, 4, 8};
};

void four_entropies(ScenarioReport& rep, Params& prm, const ShiftMeasure& measure, const FourEntropyDefaults& def,
                    std::size_t jobs) {
    const auto eps = dyadic(prm.get("eps_exponents", def.eps_exponents));
    const auto bowen_eps = dyadic(prm.get("bowen_exponents", def.bowen_exponents));
    const double level = prm.get("level", 0.5);
    const auto s = prm.get("s", std::vector<double>{0.1, 0.05, 0.01, 0.001});
    const auto r = prm.get("r", std::vector<double>{0.1, 0.05, 0.01, 0.001});
    const auto n = prm.get("n", def.n);
    const double tol = prm.get("tolerance", 0.03);
    const double h = measure.entropy_rate();

    struct Job {
        RDFamily family;
        const char* label;
        std::vector<double> eps;
        std::vector<double> fractions;
    };
    const std::vector<Job> families{{RDFamily::Lp, "h_L1", eps, {}},
                                    {RDFamily::LInf, "h_Linf", {level}, s},
                                    {RDFamily::Bowen, "h_B", bowen_eps, {}},
                                    {RDFamily::RLimit, "lim_r h_r", {level}, r}};
    std::vector<double> values;
    for (const auto& f : families) {
        RDEntropyRequest req;
        req.family = f.family;
        req.p = 1.0;
        req.epsilons = f.eps;
        req.fractions = f.fractions;
        req.block_lengths = n;
        req.jobs = jobs;
        Claim c;
        c.description = fmt::format("{} within {} of the entropy rate {:.6f}", f.label, tol, h);
        c.anchor = "rate-distortion entropy equals Kolmogorov-Sinai entropy";
        c.tolerance = tol;
        try {
            const auto e = rd_entropy(measure, req);
            for (const auto& pt : e.trail)
                rep.trail.push_back(fmt::format("{} eps={:.6g} fraction={:.6g} n*={} rate={:.6f} certified_lower={:.6f} "
                                                "converged={}",
                                                f.label, pt.epsilon, pt.fraction, pt.best_block_length, pt.result.rate,
                                                pt.certified_lower, pt.result.converged));
            c.values = {{"value", e.value},
                        {"oracle", h},
                        {"error", std::abs(e.value - h)},
                        {"certified_lower", e.certified_lower},
                        {"finest_eps", f.eps.back()},
                        {"finest_fraction", f.fractions.empty() ? 0.0 : f.fractions.back()},
                        {"n_list", n}};
            c.status = verdict(std::abs(e.value - h) <= tol);
            values.push_back(e.value);
        } catch (const Error& err) {
            c.values = {{"error_message", err.what()}};
            c.status = ClaimStatus::Fail;
        }
        rep.claims.push_back(std::move(c));
    }
    if (values.size() == families.size()) {
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        Claim c;
        c.description = fmt::format("the four estimates agree within {}", tol);
        c.anchor = "the four rate-distortion entropies coincide";
        c.tolerance = tol;
        c.values = {{"spread", *hi - *lo}, {"values", values}};
        c.status = verdict(*hi - *lo <= tol);
        rep.claims.push_back(std::move(c));
    }
}

void bernoulli_thm12(ScenarioReport& rep, Params& prm, std::size_t jobs) {
    const auto p = prm.get("p", std::vector<double>{0.5, 0.5});
    const auto sys = std::make_shared<const ShiftSystem>(ShiftSystem::full(p.size()));
    four_entropies(rep, prm, ShiftMeasure::bernoulli(sys, p), {}, jobs);
}

void markov_thm12(ScenarioReport& rep, Params& prm, std::size_t jobs) {
    const auto P = prm.get("P", std::vector<std::vector<double>>{{0.9, 0.1}, {0.5, 0.5}});
    std::vector<double> flat;
    for (const auto& row : P) {
        if (row.size() != P.size()) throw Error(ErrorCode::Config, "transition matrix must be square");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    const auto sys = std::make_shared<const ShiftSystem>(ShiftSystem::full(P.size()));
    four_entropies(rep, prm, ShiftMeasure::markov(sys, flat), {.n = {8}}, jobs);
}

void mixture_thm12(ScenarioReport& rep, Params& prm, std::size_t jobs) {
    const double a = prm.get("a", 0.2);
    const auto sys = binary_full();
    const auto mu = ShiftMeasure::mixture(
        {0.5, 0.5}, {ShiftMeasure::bernoulli(sys, {a, 1.0 - a}), ShiftMeasure::bernoulli(sys, {1.0 - a, a})});
    four_entropies(rep, prm, mu, {.n = {16, 32, 64}}, jobs);
}

// ---------------------------------------------------------------------------
// Dimensions
// ---------------------------------------------------------------------------

void band_claim(ScenarioReport& rep, const std::string& what, const std::vector<double>& ratios, double tol) {
    const double lo = 1.0 - tol, hi = 1.0 + tol;
    Claim c;
    c.description = fmt::format("{} in [{}, {}] at every grid point", what, lo, hi);
    c.anchor = "dimension of the quantized Hilbert cube equals 1";
    c.tolerance = tol;
    c.values = {{"ratios", ratios}};
    c.status = verdict(std::all_of(ratios.begin(), ratios.end(), [&](double r) { return r >= lo && r <= hi; }));
    rep.claims.push_back(std::move(c));
}

void curve_trail(ScenarioReport& rep, const std::string& label, const DimensionEstimate& d) {
    for (std::size_t i = 0; i < d.curve.points.size(); ++i) {
        const auto& pt = d.curve.points[i];
        rep.trail.push_back(fmt::format("{} {}={:.6g} value=[{:.6f},{:.6f}] ratio=[{:.6f},{:.6f}]", label,
                                        to_string(d.curve.kind), pt.scale, pt.lower, pt.upper, d.ratio_lower[i],
                                        d.ratio_upper[i]));
    }
    rep.trail.push_back(fmt::format("{} slope=[{:.6f},{:.6f}] residual=[{:.2e},{:.2e}]", label, d.slope_lower,
                                    d.slope_upper, d.residual_lower, d.residual_upper));
}

void mdim_claim(ScenarioReport& rep, const DimensionEstimate& d, double tol) {
    Claim c;
    c.description = fmt::format("metric mean dimension slope within {} of 1", tol);
    c.anchor = "metric mean dimension of the Hilbert cube shift is 1";
    c.tolerance = tol;
    c.values = {{"slope_lower", d.slope_lower}, {"slope_upper", d.slope_upper}};
    c.status = verdict(std::abs(d.slope_lower - 1.0) <= tol && std::abs(d.slope_upper - 1.0) <= tol);
    rep.claims.push_back(std::move(c));
}

void mrid_idr_thm11(ScenarioReport& rep, Params& prm, std::size_t jobs) {
    const auto grid = powers_of_two(prm.get("m_exponents", std::vector<int>{4, 5, 6, 7, 8, 9, 10}));
    const double tol = prm.get("tolerance", 0.05);
    MridOptions mo;
    mo.jobs = jobs;

    const auto leb = CubeMeasure::lebesgue();
    const auto m = mrid(leb, grid, mo);
    const auto i = information_dimension_rate(leb, grid, jobs);
    const auto top = metric_mean_dimension_cube(grid, {1}, {.jobs = jobs});
    curve_trail(rep, "lebesgue mrid", m);
    curve_trail(rep, "lebesgue idr", i);
    curve_trail(rep, "cube mdim", top);
    band_claim(rep, "Lebesgue MRID ratios", m.ratio_upper, tol);
    band_claim(rep, "Lebesgue information dimension rate ratios", i.ratio_upper, tol);
    mdim_claim(rep, top, tol);

    // Non-ergodic: half Lebesgue, half a two-atom product measure.
    const CubeMeasure mix({0.5, 0.5}, {CubeMarginal{1.0, {}}, CubeMarginal{0.0, {{0.25, 0.3}, {0.75, 0.7}}}});
    const auto mm = mrid(mix, grid, mo);
    const auto mi = information_dimension_rate(mix, grid, jobs);
    curve_trail(rep, "mixture mrid", mm);
    curve_trail(rep, "mixture idr", mi);
    for (const auto& [label, a, b] : {std::tuple{"Lebesgue", &m, &i}, std::tuple{"non-ergodic mixture", &mm, &mi}}) {
        std::vector<double> diff;
        for (std::size_t k = 0; k < grid.size(); ++k) diff.push_back(std::abs(a->ratio_upper[k] - b->ratio_upper[k]));
        Claim c;
        c.description = fmt::format("|MRID - IDR| <= {} pointwise on the matched grid ({})", tol, label);
        c.anchor = "mean Renyi information dimension equals information dimension rate";
        c.tolerance = tol;
        c.values = {{"abs_differences", diff}};
        c.status = verdict(std::all_of(diff.begin(), diff.end(), [&](double d) { return d <= tol; }));
        rep.claims.push_back(std::move(c));
    }
}

void hilbert_cube_ex24(ScenarioReport& rep, Params& prm, std::size_t jobs) {
    const auto grid = powers_of_two(prm.get("m_exponents", std::vector<int>{4, 5, 6, 7, 8, 9, 10}));
    const auto n = prm.get("n", std::vector<std::size_t>{1, 2, 4});
    const double tol = prm.get("tolerance", 0.05);
    const auto d = metric_mean_dimension_cube(grid, n, {.jobs = jobs});
    curve_trail(rep, "cube mdim", d);
    mdim_claim(rep, d, tol);
    band_claim(rep, "endpoint ratio h(eps)/log(1/eps)", {d.endpoint_lower, d.endpoint_upper}, tol);
}

// ---------------------------------------------------------------------------
// Inequalities
// ---------------------------------------------------------------------------

// Every entry of `a` is >= the matching entry of `b`.
bool dominates(const DistortionTable& a, const DistortionTable& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (std::size_t i = 0; i < a.values().size(); ++i)
        if (a.values()[i] < b.values()[i]) return false;
    return true;
}

// left <= right for brackets [lo, hi].
ClaimStatus compare(double left_lo, double left_hi, double right_lo, double right_hi) {
    if (left_hi <= right_lo) return ClaimStatus::Pass;
    if (left_lo > right_hi) return ClaimStatus::Fail;
    return ClaimStatus::Indeterminate;
}

ClaimStatus combine(const std::vector<ClaimStatus>& all) {
    if (std::any_of(all.begin(), all.end(), [](auto s) { return s == ClaimStatus::Fail; })) return ClaimStatus::Fail;
    if (std::any_of(all.begin(), all.end(), [](auto s) { return s == ClaimStatus::Indeterminate; }))
        return ClaimStatus::Indeterminate;
    return ClaimStatus::Pass;
}

void rd_inequality_21(ScenarioReport& rep, Params& prm, std::size_t jobs) {
    const auto eps = dyadic(prm.get("eps_exponents", std::vector<int>{2, 3, 4, 5, 6}));
    const auto n_max = prm.get("n_max", std::size_t{6});
    const double p = prm.get("p", 2.0);
    const double factor = prm.get("factor", 14.0);
    const auto sys = binary_full();
    const auto mu = ShiftMeasure::bernoulli(sys, {0.5, 0.5});

    struct Point {
        double eps;
        std::size_t n;
        RDBracket left, right;
        RDResult middle;
        bool dominance = false;
    };
    std::vector<Point> pts;
    for (std::size_t n = 1; n <= n_max; ++n)
        for (double e : eps) pts.push_back({e, n, {}, {}, {}});
    parallel_for(pts.size(), jobs, [&](std::size_t k) {
        auto& pt = pts[k];
        const auto single = make_spec(RDFamily::Lp, p, pt.eps, 0, pt.n);
        const auto windowed = make_spec(RDFamily::Lp, p, pt.eps, 0, pt.n, MetricMode::WindowedProduct);
        pt.middle = rate_distortion_function(mu, single);
        pt.right = rate_distortion_bracket(mu, windowed);
        pt.left = rate_distortion_bracket(mu, make_spec(RDFamily::Lp, p, factor * pt.eps, 0, pt.n,
                                                        MetricMode::WindowedProduct));
        pt.dominance = dominates(block_distortion(*sys, windowed).lower, block_distortion(*sys, single).lower);
    });

    std::vector<ClaimStatus> left_status, right_status;
    json left_values = json::array(), right_values = json::array();
    for (const auto& pt : pts) {
        const double l_lo = pt.left.from_lower.rate_lower, l_hi = pt.left.from_upper.rate;
        const double m_lo = pt.middle.rate_lower, m_hi = pt.middle.rate;
        const double r_lo = pt.right.from_lower.rate_lower, r_hi = pt.right.from_upper.rate;
        rep.trail.push_back(fmt::format("n={} eps={:.6g} R({}eps)=[{:.6f},{:.6f}] R~(eps)=[{:.6f},{:.6f}] "
                                        "R(eps)=[{:.6f},{:.6f}] table_dominance={}",
                                        pt.n, pt.eps, factor, l_lo, l_hi, m_lo, m_hi, r_lo, r_hi, pt.dominance));
        left_status.push_back(compare(l_lo, l_hi, m_lo, m_hi));
        // The windowed lower table dominating the single-coordinate one
        // entrywise certifies R~ <= R without any tolerance.
        auto rs = compare(m_lo, m_hi, r_lo, r_hi);
        if (rs == ClaimStatus::Indeterminate && pt.dominance) rs = ClaimStatus::Pass;
        right_status.push_back(rs);
        left_values.push_back({{"n", pt.n}, {"eps", pt.eps}, {"left", {l_lo, l_hi}}, {"middle", {m_lo, m_hi}},
                               {"status", to_string(left_status.back())}});
        right_values.push_back({{"n", pt.n}, {"eps", pt.eps}, {"middle", {m_lo, m_hi}}, {"right", {r_lo, r_hi}},
                                {"table_dominance", pt.dominance}, {"status", to_string(right_status.back())}});
    }
    Claim l;
    l.description = fmt::format("R_L{}({}eps) <= R~_L{}(eps) at every grid point (upper of left <= lower of middle)", p,
                                factor, p);
    l.anchor = "windowed and single-coordinate rate-distortion functions are related";
    l.values = left_values;
    l.status = combine(left_status);
    Claim r;
    r.description = fmt::format("R~_L{}(eps) <= R_L{}(eps) at every grid point", p, p);
    r.anchor = l.anchor;
    r.values = right_values;
    r.status = combine(right_status);
    rep.claims.push_back(std::move(l));
    rep.claims.push_back(std::move(r));
}

void lemma31_chain(ScenarioReport& rep, Params& prm, std::size_t jobs) {
    const auto eps = dyadic(prm.get("eps_exponents", std::vector<int>{2, 3, 4, 5, 6, 7}));
    const auto n = prm.get("n", std::size_t{2});
    const auto cube_exponents = prm.get("cube_exponents", std::vector<int>{4, 5, 6, 7, 8, 9, 10});
    const auto sys = binary_full();
    const std::vector<std::pair<std::string, ShiftMeasure>> measures{
        {"bernoulli(0.3,0.7)", ShiftMeasure::bernoulli(sys, {0.3, 0.7})},
        {"markov[[0.9,0.1],[0.5,0.5]]", ShiftMeasure::markov(sys, {0.9, 0.1, 0.5, 0.5})},
        {"quantized lebesgue m=4", CubeMeasure::lebesgue().quantize(4)}};

    std::vector<ClaimStatus> rd_vs_ks, rdim_vs_mrid, ks_bracket;
    json rd_values = json::array(), dim_values = json::array();
    for (const auto& [label, mu] : measures) {
        MridOptions mo;
        mo.jobs = jobs;
        mo.ks.rd_lower = true;
        mo.ks.rd_block_length = n;
        const auto ks = mrid(mu, eps, mo);
        curve_trail(rep, label + " mrid", ks);
        for (std::size_t k = 0; k < eps.size(); ++k) ks_bracket.push_back(verdict(ks.curve.points[k].lower <= ks.curve.points[k].upper));
        // R_{L^1}(2 eps), certified lower end, against the partition upper bound at eps.
        std::vector<double> rd(eps.size());
        parallel_for(eps.size(), jobs, [&](std::size_t k) {
            rd[k] = rate_distortion_function(mu, make_spec(RDFamily::Lp, 1.0, 2 * eps[k], 0, n)).certified_lower;
        });
        for (std::size_t k = 0; k < eps.size(); ++k) {
            rd_vs_ks.push_back(verdict(rd[k] <= ks.curve.points[k].upper));
            rd_values.push_back({{"measure", label}, {"eps", eps[k]}, {"R_L1_2eps_lower", rd[k]},
                                 {"ks_upper", ks.curve.points[k].upper}});
        }
        for (double p : {1.0, 2.0}) {
            RdimRequest rq;
            rq.p = p;
            rq.block_length = n;
            rq.jobs = jobs;
            const auto rd_dim = rdim(mu, eps, rq);
            curve_trail(rep, fmt::format("{} rdim L{}", label, p), rd_dim);
            bool ok = rd_dim.floor_lower <= ks.lower && rd_dim.floor_upper <= ks.upper;
            for (std::size_t k = 0; k < eps.size(); ++k) ok = ok && rd_dim.ratio_lower[k] <= ks.ratio_upper[k];
            rdim_vs_mrid.push_back(verdict(ok));
            dim_values.push_back({{"measure", label}, {"p", p}, {"rdim_floor", {rd_dim.floor_lower, rd_dim.floor_upper}},
                                  {"mrid", {ks.lower, ks.upper}}});
        }
    }
    Claim a;
    a.description = "R_L1(2eps) certified lower <= KS eps-entropy upper at every eps";
    a.anchor = "rate-distortion function at 2eps is below the partition entropy at diameter eps";
    a.values = rd_values;
    a.status = combine(rd_vs_ks);
    Claim b;
    b.description = "rdim(L^p) <= MRID, enclosure-safe, p = 1, 2";
    b.anchor = "rate-distortion dimension is at most the mean Renyi information dimension";
    b.values = dim_values;
    b.status = combine(rdim_vs_mrid);
    Claim c;
    c.description = "KS eps-entropy bracket is ordered";
    c.anchor = "lower <= upper";
    c.values = {{"points", ks_bracket.size()}};
    c.status = combine(ks_bracket);

    // Window-refined partitions of the quantized cube: diameter < 4/m at
    // N = log2 m + 3, entropy rate unchanged by the refinement.
    json win = json::array();
    std::vector<ClaimStatus> win_status;
    for (int j : cube_exponents) {
        const std::size_t m = std::size_t{1} << j;
        const auto q = CubeMeasure::lebesgue().quantize(m);
        const auto fam = PartitionFamily::alphabet(q.system(), static_cast<std::size_t>(j + 3));
        const double rate = block_entropy(q, fam, 64) / 64.0;
        const double expected = std::log(double(m)) * (64.0 + 2.0 * (j + 3)) / 64.0;
        win_status.push_back(verdict(fam.diameter_bound < 4.0 / m && std::abs(rate - expected) < 1e-9));
        win.push_back({{"m", m}, {"window", j + 3}, {"diameter_bound", fam.diameter_bound}, {"four_over_m", 4.0 / m},
                       {"block_entropy_rate_n64", rate}});
    }
    Claim d;
    d.description = "window-refined partition of the m-cell cube has diameter < 4/m";
    d.anchor = "refining alpha_m over a window of log2 m + 3 coordinates gives diameter below 4/m";
    d.values = win;
    d.status = combine(win_status);
    for (auto* cl : {&a, &b, &c, &d}) rep.claims.push_back(std::move(*cl));
}

void step_inequalities(ScenarioReport& rep, Params& prm, std::size_t jobs) {
    const auto eps = prm.get("eps", std::vector<double>{0.5, 0.25, 0.1});
    const double s = prm.get("s", 0.001);
    const auto n_list = prm.get("n", std::vector<std::size_t>{1, 2, 4});
    const auto sys = binary_full();
    const std::vector<std::pair<std::string, ShiftMeasure>> measures{
        {"bernoulli(0.3,0.7)", ShiftMeasure::bernoulli(sys, {0.3, 0.7})},
        {"markov[[0.9,0.1],[0.5,0.5]]", ShiftMeasure::markov(sys, {0.9, 0.1, 0.5, 0.5})}};

    std::vector<ClaimStatus> chain, identity;
    json chain_values = json::array();
    for (const auto& [label, mu] : measures)
        for (std::size_t n : n_list) {
            std::vector<std::array<RDResult, 4>> res(eps.size());
            parallel_for(eps.size() * 4, jobs, [&](std::size_t k) {
                const double e = eps[k / 4];
                const DistortionSpec spec = std::array{make_spec(RDFamily::Lp, 1.0, e, 0, n),
                                                       make_spec(RDFamily::Lp, 2.0, e, 0, n),
                                                       make_spec(RDFamily::LInf, 1.0, e, s, n),
                                                       make_spec(RDFamily::RLimit, 1.0, e, s, n)}[k % 4];
                res[k / 4][k % 4] = rate_distortion_function(mu, spec);
            });
            for (std::size_t k = 0; k < eps.size(); ++k) {
                const auto& [l1, l2, linf, rl] = res[k];
                const auto a = compare(l1.rate_lower, l1.rate, l2.rate_lower, l2.rate);
                const auto b = compare(l2.rate_lower, l2.rate, linf.rate_lower, linf.rate);
                chain.push_back(combine({a, b}));
                identity.push_back(verdict(linf.rate == rl.rate && linf.achieved_distortion == rl.achieved_distortion));
                rep.trail.push_back(fmt::format("{} n={} eps={:.6g} R_L1={:.6f} R_L2={:.6f} R_Linf(s={:.6g})={:.6f} "
                                                "R_r={:.6f}",
                                                label, n, eps[k], l1.rate, l2.rate, s, linf.rate, rl.rate));
                chain_values.push_back({{"measure", label}, {"n", n}, {"eps", eps[k]},
                                        {"R_L1", {l1.rate_lower, l1.rate}}, {"R_L2", {l2.rate_lower, l2.rate}},
                                        {"R_Linf", {linf.rate_lower, linf.rate}}});
            }
        }
    Claim a;
    a.description = fmt::format("R_L1(eps) <= R_L2(eps) <= R_Linf(eps, s={}) bracket-safe", s);
    a.anchor = "ordering of the L^p and L^infinity rate-distortion functions";
    a.values = chain_values;
    a.status = combine(chain);
    Claim b;
    b.description = "R_Linf(eps, r) == R_r(eps) exactly";
    b.anchor = "the L^infinity and r-mistake rate-distortion functions coincide";
    b.values = {{"points", identity.size()}};
    b.status = combine(identity);

    // Separated sets at eps never outnumber spanning sets at eps/2.
    std::vector<ClaimStatus> sandwich;
    json sand = json::array();
    for (const auto& sysx : {ShiftSystem::full(2, 8), ShiftSystem::golden_mean(8), ShiftSystem::quantized_cube(3, 8)})
        for (std::size_t n = 1; n <= 8; ++n) {
            const auto words = enumerate_words(sysx, n);
            if (words.size() > 600) continue;
            for (double e : {0.2, 0.7, 1.6}) {
                const auto sep = greedy_separated_count(sysx, words, e);
                const auto span = greedy_spanning_count(sysx, words, e / 2);
                sandwich.push_back(verdict(sep <= span));
                sand.push_back({{"alphabet", sysx.alphabet().size()}, {"n", n}, {"eps", e}, {"separated", sep},
                                {"spanning_half", span}});
            }
        }
    Claim c;
    c.description = "greedy separated count at eps <= greedy spanning count at eps/2, n <= 8";
    c.anchor = "separated and spanning numbers sandwich each other";
    c.values = sand;
    c.status = combine(sandwich);

    // Katok count at delta never exceeds the number of admissible words.
    std::vector<ClaimStatus> katok;
    for (const auto& [label, mu] : measures)
        for (std::size_t n : {2u, 4u, 8u}) {
            const auto k = katok_eps_entropy(mu, 0.5, 0.1, {n});
            const auto t = topological_eps_entropy(mu.system(), 0.5, {n});
            katok.push_back(verdict(k.upper <= t.lower + 1e-12));
            rep.trail.push_back(fmt::format("{} n={} katok={:.6f} topological={:.6f}", label, n, k.upper, t.lower));
        }
    Claim d;
    d.description = "Katok eps-entropy <= topological eps-entropy";
    d.anchor = "measure-theoretic covering numbers are bounded by topological ones";
    d.values = {{"points", katok.size()}};
    d.status = combine(katok);
    for (auto* cl : {&a, &b, &c, &d}) rep.claims.push_back(std::move(*cl));
}

}  // namespace

namespace {

const std::map<std::string, std::set<std::string>>& allowed_params() {
    static const std::set<std::string> four{"eps_exponents", "bowen_exponents", "level", "s", "r", "n", "tolerance"};
    auto with = [](std::set<std::string> base, const char* extra) {
        base.insert(extra);
        return base;
    };
    static const std::map<std::string, std::set<std::string>> keys{
        {"bernoulli-thm12", with(four, "p")},
        {"markov-thm12", with(four, "P")},
        {"mixture-thm12", with(four, "a")},
        {"mrid-idr-thm11", {"m_exponents", "tolerance"}},
        {"hilbert-cube-ex24", {"m_exponents", "n", "tolerance"}},
        {"rd-inequality-21", {"eps_exponents", "n_max", "p", "factor"}},
        {"lemma31-chain", {"eps_exponents", "n", "cube_exponents"}},
        {"step-inequalities", {"eps", "s", "n"}}};
    return keys;
}

}  // namespace

ScenarioReport run_scenario(const std::string& id, const json& params, std::size_t jobs) {
    using Runner = std::function<void(ScenarioReport&, Params&, std::size_t)>;
    static const std::map<std::string, Runner> runners{
        {"bernoulli-thm12", bernoulli_thm12},   {"markov-thm12", markov_thm12},
        {"mixture-thm12", mixture_thm12},       {"mrid-idr-thm11", mrid_idr_thm11},
        {"hilbert-cube-ex24", hilbert_cube_ex24}, {"rd-inequality-21", rd_inequality_21},
        {"lemma31-chain", lemma31_chain},       {"step-inequalities", step_inequalities}};
    const auto it = runners.find(id);
    if (it == runners.end()) {
        std::string known;
        for (const auto& s : scenario_ids()) known += (known.empty() ? "" : ", ") + s;
        throw Error(ErrorCode::UnknownScenario, "'" + id + "' (known: " + known + ")");
    }
    if (!params.is_null() && !params.is_object()) throw Error(ErrorCode::Config, "scenario params must be a JSON object");
    if (params.is_object())
        for (const auto& [k, v] : params.items())
            if (!allowed_params().at(id).count(k))
                throw Error(ErrorCode::Config, "unknown parameter '" + k + "' for scenario " + id);
    const auto t0 = std::chrono::steady_clock::now();
    ScenarioReport rep;
    rep.id = id;
    Params prm(params);
    it->second(rep, prm, std::max<std::size_t>(jobs, 1));
    rep.params = prm.finish();
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace erl

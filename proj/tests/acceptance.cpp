// Acceptance checks: one line per criterion, exit status 1 if any fails.
// Optional arguments select criteria by name (e.g. "AC4 AC7").

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "erl/entropy.hpp"
#include "erl/info.hpp"
#include "erl/mean_dimension.hpp"
#include "erl/rate_distortion.hpp"
#include "erl/verify.hpp"

using namespace erl;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

auto full(std::size_t k) { return std::make_shared<const ShiftSystem>(ShiftSystem::full(k)); }

std::vector<double> dyadic(int from, int to) {
    std::vector<double> g;
    for (int j = from; j <= to; ++j) g.push_back(std::ldexp(1.0, -j));
    return g;
}

// The first four claims of a four-entropy scenario are the per-family checks.
Outcome four_within(const ScenarioReport& rep, const std::string& label) {
    Outcome o{true, label + ":"};
    for (std::size_t i = 0; i < 4 && i < rep.claims.size(); ++i) {
        const auto& c = rep.claims[i];
        const bool ok = c.status == ClaimStatus::Pass;
        o.pass = o.pass && ok;
        if (c.values.contains("value"))
            o.detail += fmt::format(" {}={:.6f}({})", c.description.substr(0, c.description.find(' ')),
                                    c.values.at("value").get<double>(), ok ? "ok" : "off");
        else
            o.detail += " " + c.description + " failed: " + c.values.dump();
    }
    o.pass = o.pass && rep.claims.size() >= 4;
    return o;
}

Outcome ac1() {
    Outcome total{true, ""};
    for (const auto& p : {std::vector<double>{0.5, 0.5}, std::vector<double>{0.3, 0.7}}) {
        const json params = {{"p", p},
                             {"eps_exponents", {3, 4, 5, 6}},
                             {"bowen_exponents", {3, 4, 5, 6}},
                             {"s", {0.1, 0.05, 0.01, 0.001}},
                             {"r", {0.1, 0.05, 0.01, 0.001}},
                             {"n", {1, 2, 4, 8}},
                             {"tolerance", 0.03}};
        const auto rep = run_scenario("bernoulli-thm12", params);
        auto o = four_within(rep, fmt::format("Bernoulli({},{}) h={:.6f}", p[0], p[1],
                                              rep.claims.at(0).values.value("oracle", 0.0)));
        const bool fast = rep.wall_seconds < 120.0;
        o.detail += fmt::format(" [{:.1f} s{}]", rep.wall_seconds, fast ? "" : " > 120 s");
        total.pass = total.pass && o.pass && fast;
        total.detail += (total.detail.empty() ? "" : "; ") + o.detail;
    }
    return total;
}

Outcome ac2() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto m = ShiftMeasure::markov(full(2), {0.9, 0.1, 0.5, 0.5});
    RDEntropyRequest rq;
    rq.family = RDFamily::Lp;
    rq.epsilons = dyadic(4, 10);
    rq.epsilons = {rq.epsilons[0], rq.epsilons[2], rq.epsilons[4], rq.epsilons[6]};
    rq.block_lengths = {8};
    const auto e = rd_entropy(m, rq);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double oracle = 0.386427;
    const bool ok = std::abs(e.value - oracle) <= 0.03 && std::abs(m.entropy_rate() - oracle) <= 1e-6;
    return {ok && secs < 300.0, fmt::format("h_L1(n=8, eps=2^-10)={:.6f} oracle={:.6f} entropy_rate={:.6f} "
                                            "|diff|={:.4f} [{:.1f} s]",
                                            e.value, oracle, m.entropy_rate(), std::abs(e.value - oracle), secs)};
}

Outcome ac3() {
    const auto rep = run_scenario("mixture-thm12");
    auto o = four_within(rep, "mixture oracle 0.500402");
    const bool fast = rep.wall_seconds < 300.0;
    o.pass = o.pass && fast;
    o.detail += fmt::format(" [{:.1f} s]", rep.wall_seconds);
    return o;
}

Outcome scenario_all(const std::string& id, double limit_seconds) {
    const auto rep = run_scenario(id);
    Outcome o{rep.passed() && rep.wall_seconds < limit_seconds, ""};
    for (const auto& c : rep.claims) o.detail += fmt::format("{}[{}] ", c.description, to_string(c.status));
    o.detail += fmt::format("[{:.1f} s]", rep.wall_seconds);
    return o;
}

Outcome ac6() {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    const auto grid = dyadic(2, 7);
    std::size_t checks = 0, violations = 0, rate_above = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t k = 2 + trial % 2;
        const bool markov = trial % 2 == 0;
        std::vector<double> v(markov ? k * k : k);
        for (auto& x : v) x = u(rng);
        for (std::size_t r = 0; r < v.size() / k; ++r) {
            double s = 0;
            for (std::size_t c = 0; c < k; ++c) s += v[r * k + c];
            for (std::size_t c = 0; c < k; ++c) v[r * k + c] /= s;
        }
        const auto m = markov ? ShiftMeasure::markov(full(k), v) : ShiftMeasure::bernoulli(full(k), v);
        const auto ks = mrid(m, grid);
        for (double p : {1.0, 2.0}) {
            RdimRequest rq;
            rq.p = p;
            rq.block_length = 2;
            const auto rd = rdim(m, grid, rq);
            for (std::size_t i = 0; i < grid.size(); ++i, ++checks)
                violations += rd.ratio_lower[i] > ks.ratio_upper[i] + 1e-9;
            checks += 2;
            violations += rd.floor_upper > ks.upper + 1e-9;
            violations += rd.floor_lower > ks.lower + 1e-9;
        }
        for (double eps : grid) {
            const auto r = rate_distortion_function(m, make_spec(RDFamily::Lp, 1.0, 2 * eps, 0, 2));
            const double upper = ks_eps_entropy(m, eps, {.rd_lower = false}).upper;
            ++checks;
            violations += r.certified_lower > upper + 1e-9;
            rate_above += r.rate > upper + 1e-9;
        }
    }
    return {violations == 0, fmt::format("20 measures, {} enclosure-safe checks, {} violations ({} points where the "
                                         "achievable block rate alone exceeds the upper end)",
                                         checks, violations, rate_above)};
}

DistortionTable hamming(std::size_t k) {
    std::vector<double> t(k * k, 1.0);
    for (std::size_t i = 0; i < k; ++i) t[i * k + i] = 0.0;
    return DistortionTable(k, k, t);
}

double channel_information(const std::vector<double>& px, const std::vector<double>& q, std::size_t k) {
    return mutual_information(JointDistribution::from_channel(px, q, k));
}

// k = 2: every channel (a, b) = (Q(1|0), Q(0|1)) on a step-h grid.
double brute_force_k2(const std::vector<double>& px, double d, double h) {
    const int steps = static_cast<int>(std::lround(1.0 / h));
    double best = INFINITY;
    for (int i = 0; i <= steps; ++i)
        for (int j = 0; j <= steps; ++j) {
            const double a = i * h, b = j * h;
            if (px[0] * a + px[1] * b > d) continue;
            best = std::min(best, channel_information(px, {1 - a, a, b, 1 - b}, 2));
        }
    return best;
}

// k >= 3: every output law r on a step-h simplex grid; for fixed r the best
// channel is Q(y|x) ~ r(y) exp(beta d(x,y)) with beta set by the budget, and
// sum_x p(x) KL(Q(.|x) || r) >= I(X;Y) with equality at the optimum.
double brute_force_k3(const std::vector<double>& px, const DistortionTable& dt, double d, double h) {
    const int steps = static_cast<int>(std::lround(1.0 / h));
    const std::size_t k = 3;
    double best = INFINITY;
    auto value_at = [&](const std::array<double, 3>& r, double beta, double& dist) {
        double val = 0.0;
        dist = 0.0;
        for (std::size_t x = 0; x < k; ++x) {
            double z = 0.0, ed = 0.0;
            for (std::size_t y = 0; y < k; ++y) {
                const double w = r[y] * std::exp(beta * dt.at(x, y));
                z += w;
                ed += w * dt.at(x, y);
            }
            ed /= z;
            dist += px[x] * ed;
            val += px[x] * (beta * ed - std::log(z));
        }
        return val;
    };
    for (int i = 0; i <= steps; ++i)
        for (int j = 0; i + j <= steps; ++j) {
            const std::array<double, 3> r{i * h, j * h, (steps - i - j) * h};
            double dist = 0.0;
            double val = value_at(r, 0.0, dist);
            if (dist > d) {
                double lo = -400.0, hi = 0.0;
                value_at(r, lo, dist);
                if (dist > d) continue;  // this support cannot meet the budget
                for (int it = 0; it < 80; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    value_at(r, mid, dist);
                    (dist > d ? hi : lo) = mid;
                }
                val = value_at(r, lo, dist);
            }
            best = std::min(best, val);
        }
    return best;
}

Outcome ac7() {
    double worst_closed = 0.0;
    for (double p : {0.5, 0.3, 0.1}) {
        const std::vector<double> src{p, 1 - p};
        for (int i = 0; i < 50; ++i) {
            const double d = 0.001 + (p - 0.002) * i / 49.0;
            const auto r = blahut_arimoto(src, hamming(2), d);
            const double err = r.converged ? std::abs(r.rate - (binary_entropy(p) - binary_entropy(d))) : INFINITY;
            worst_closed = std::max(worst_closed, err);
        }
    }
    double worst_k2 = 0.0, worst_k3 = 0.0;
    const std::vector<double> p2{0.3, 0.7};
    for (double d : {0.05, 0.1, 0.2}) {
        const auto r = blahut_arimoto(p2, hamming(2), d);
        worst_k2 = std::max(worst_k2, std::abs(r.rate - brute_force_k2(p2, d, 1e-3)));
    }
    const std::vector<double> p3{0.5, 0.3, 0.2};
    const DistortionTable d3(3, 3, {0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0});
    for (const auto& [table, d] : {std::pair{hamming(3), 0.1}, std::pair{hamming(3), 0.3}, std::pair{d3, 0.2},
                                   std::pair{d3, 0.5}}) {
        const auto r = blahut_arimoto(p3, table, d);
        worst_k3 = std::max(worst_k3, std::abs(r.rate - brute_force_k3(p3, table, d, 1e-3)));
    }
    return {worst_closed <= 1e-4 && worst_k2 <= 1e-3 && worst_k3 <= 1e-3,
            fmt::format("closed form 3x50 D points max err {:.2e} (<= 1e-4); grid search k=2 max err {:.2e}, "
                        "k=3 max err {:.2e} (<= 1e-3)",
                        worst_closed, worst_k2, worst_k3)};
}

std::pair<std::size_t, std::size_t> exact_span_sep(const ShiftSystem& sys, const WordList& w, double span_radius,
                                                   double sep_eps) {
    const std::size_t k = w.size();
    std::size_t best_span = k, best_sep = 0;
    for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
        const auto size = static_cast<std::size_t>(std::popcount(mask));
        bool spans = true, separated = true;
        for (std::size_t i = 0; i < k && spans; ++i) {
            if (mask >> i & 1) continue;
            bool hit = false;
            for (std::size_t c = 0; c < k && !hit; ++c)
                hit = (mask >> c & 1) && bowen_distance(sys, w[i], w[c]).upper < span_radius;
            spans = hit;
        }
        for (std::size_t a = 0; a < k && separated; ++a)
            for (std::size_t b = a + 1; b < k && separated; ++b)
                if ((mask >> a & 1) && (mask >> b & 1)) separated = bowen_distance(sys, w[a], w[b]).lower >= sep_eps;
        if (spans) best_span = std::min(best_span, size);
        if (separated) best_sep = std::max(best_sep, size);
    }
    return {best_span, best_sep};
}

Outcome ac8() {
    std::size_t checks = 0;
    std::vector<std::string> failures;
    auto check = [&](bool ok, const std::string& what) {
        ++checks;
        if (!ok && failures.size() < 5) failures.push_back(what);
        else if (!ok) failures.back() = "...";
    };
    std::mt19937_64 rng(8);

    // Spanning/separated sandwich, exhaustive n <= 8, sampled word sets beyond.
    const std::vector<ShiftSystem> systems{ShiftSystem::full(2, 6), ShiftSystem::golden_mean(6),
                                           ShiftSystem::quantized_cube(3, 6)};
    const std::vector<double> radii{0.05, 0.2, 0.45, 0.7, 1.1, 1.6, 2.5};
    for (const auto& sys : systems) {
        for (std::size_t n = 1; n <= 8; ++n) {
            const auto words = enumerate_words(sys, n);
            if (words.size() > 800) continue;
            for (double eps : radii) {
                const auto sep = greedy_separated_count(sys, words, eps);
                const auto span_half = greedy_spanning_count(sys, words, eps / 2);
                check(sep <= span_half && sep >= 1, fmt::format("sandwich n={} eps={}", n, eps));
                if (words.size() <= 12) {
                    const auto [r, s] = exact_span_sep(sys, words, eps, eps);
                    const auto [r_half, unused] = exact_span_sep(sys, words, eps / 2, eps);
                    check(r <= greedy_spanning_count(sys, words, eps) && sep <= s && s <= r_half,
                          fmt::format("exact sandwich n={} eps={}", n, eps));
                }
            }
        }
        for (std::size_t n = 9; n <= 16; ++n) {
            const auto m = ShiftMeasure::bernoulli(std::make_shared<const ShiftSystem>(ShiftSystem::full(2, 6)),
                                                   {0.5, 0.5});
            WordList words(n);
            std::set<Word> seen;
            for (int i = 0; i < 300; ++i) {
                const auto w = m.sample_orbit(n, rng());
                if (seen.insert(w).second) words.push_back(w);
            }
            for (double eps : radii) {
                const auto sys2 = ShiftSystem::full(2, 6);
                check(greedy_separated_count(sys2, words, eps) <= greedy_spanning_count(sys2, words, eps / 2),
                      fmt::format("sampled sandwich n={} eps={}", n, eps));
            }
        }
    }

    // Monotonicity in eps, delta and s.
    const auto bern = ShiftMeasure::bernoulli(std::make_shared<const ShiftSystem>(ShiftSystem::quantized_cube(2, 8)),
                                              {0.3, 0.7});
    for (std::size_t n = 1; n <= 8; ++n) {
        double prev_eps_upper = INFINITY;
        for (double eps : {0.02, 0.1, 0.3, 0.6, 1.2}) {
            double prev_delta = INFINITY;
            for (double delta : {0.05, 0.2, 0.5, 0.8}) {
                const auto e = katok_eps_entropy(bern, eps, delta, {n});
                check(e.upper <= prev_delta + 1e-12, fmt::format("katok delta n={} eps={}", n, eps));
                prev_delta = e.upper;
            }
            const auto e = katok_eps_entropy(bern, eps, 0.2, {n});
            check(e.lower <= prev_eps_upper + 1e-12, fmt::format("katok eps n={} eps={}", n, eps));
            prev_eps_upper = e.upper;
        }
    }
    const auto cube = ShiftSystem::quantized_cube(3, 8);
    for (std::size_t n : {1, 2, 3, 4}) {
        double prev = INFINITY;
        for (double eps : {0.05, 0.3, 0.6, 1.2, 2.0}) {
            const auto e = topological_eps_entropy(cube, eps, {n});
            check(e.lower <= prev + 1e-12, fmt::format("topological eps n={} eps={}", n, eps));
            prev = e.upper;
        }
    }
    const auto bern2 = ShiftMeasure::bernoulli(full(2), {0.3, 0.7});
    for (std::size_t n : {1, 2, 4}) {
        double prev_s = INFINITY;
        for (double s : {0.01, 0.05, 0.1, 0.2}) {
            const auto r = rate_distortion_function(bern2, make_spec(RDFamily::LInf, 1.0, 0.5, s, n));
            check(r.rate_lower <= prev_s + 1e-7, fmt::format("rd s n={} s={}", n, s));
            prev_s = r.rate;
        }
        double prev_e = INFINITY;
        for (double eps : {0.05, 0.1, 0.2, 0.3}) {
            const auto r = rate_distortion_function(bern2, make_spec(RDFamily::Lp, 1.0, eps, 0, n));
            check(r.rate_lower <= prev_e + 1e-7, fmt::format("rd eps n={} eps={}", n, eps));
            prev_e = r.rate;
        }
    }

    // Mutual information: nonnegative, symmetric, three forms agree.
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t r = 1 + trial % 6, c = 1 + (trial / 6) % 7;
        std::vector<double> t(r * c);
        double total = 0.0;
        for (auto& v : t) {
            v = u(rng) < 0.3 ? 0.0 : u(rng);
            total += v;
        }
        if (total == 0.0) t[0] = total = 1.0;
        for (auto& v : t) v /= total;
        const JointDistribution j(r, c, t);
        const double mi = mutual_information(j);
        const double f1 = shannon_entropy(j.marginal_x()) - conditional_entropy(j);
        const double f2 = shannon_entropy(j.marginal_y()) - conditional_entropy(j.transposed());
        check(mi >= 0.0 && std::abs(mi - mutual_information(j.transposed())) <= 1e-10 &&
                  std::abs(mi - f1) <= 1e-10 && std::abs(mi - f2) <= 1e-10 &&
                  std::abs(mi - mutual_information_direct(j)) <= 1e-10,
              fmt::format("mutual information trial {}", trial));
    }

    // Cylinder masses: total 1 and shift invariant, exhaustive n <= 8, sampled to 16.
    const auto golden = std::make_shared<const ShiftSystem>(ShiftSystem::golden_mean());
    const std::vector<ShiftMeasure> measures{
        ShiftMeasure::bernoulli(full(3), {0.2, 0.3, 0.5}), ShiftMeasure::markov(full(2), {0.9, 0.1, 0.5, 0.5}),
        ShiftMeasure::markov(golden, {0.6, 0.4, 1.0, 0.0}),
        ShiftMeasure::mixture({0.5, 0.5},
                              {ShiftMeasure::bernoulli(full(2), {0.2, 0.8}), ShiftMeasure::bernoulli(full(2), {0.8, 0.2})})};
    auto extend_sum = [](const ShiftMeasure& m, std::span<const Symbol> x, bool left) {
        double s = 0.0;
        for (std::size_t a = 0; a < m.alphabet_size(); ++a) {
            Word w;
            if (left) w.push_back(static_cast<Symbol>(a));
            w.insert(w.end(), x.begin(), x.end());
            if (!left) w.push_back(static_cast<Symbol>(a));
            if (m.system().is_admissible(w)) s += m.cylinder_mass(w);
        }
        return s;
    };
    for (const auto& m : measures) {
        for (std::size_t n = 1; n <= 8; ++n) {
            const auto words = enumerate_words(m.system(), n);
            double total = 0.0;
            bool invariant = true;
            for (std::size_t i = 0; i < words.size(); ++i) {
                const double mass = m.cylinder_mass(words[i]);
                total += mass;
                invariant = invariant && std::abs(extend_sum(m, words[i], true) - mass) <= 1e-12 &&
                            std::abs(extend_sum(m, words[i], false) - mass) <= 1e-12;
            }
            check(std::abs(total - 1.0) <= 1e-9 && invariant, fmt::format("{} n={}", m.describe(), n));
        }
        for (std::size_t n = 9; n <= 16; ++n)
            for (int i = 0; i < 50; ++i) {
                const auto w = m.sample_orbit(n, rng());
                const double mass = m.cylinder_mass(w);
                check(std::abs(extend_sum(m, w, true) - mass) <= 1e-12 * std::max(1.0, mass * 1e3) &&
                          std::abs(extend_sum(m, w, false) - mass) <= 1e-12 * std::max(1.0, mass * 1e3),
                      fmt::format("{} sampled n={}", m.describe(), n));
            }
    }

    std::string detail = fmt::format("{} checks, {} violations", checks, failures.size());
    for (const auto& f : failures) detail += "; " + f;
    return {failures.empty(), detail};
}

struct Criterion {
    const char* name;
    const char* text;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {"AC1", "four rate-distortion entropies of Bernoulli(0.5,0.5) and (0.3,0.7) within 0.03 of h (eps to 2^-6, n <= 8)",
         ac1},
        {"AC2", "Markov L1 rate-distortion entropy at n=8 within 0.03 of 0.386427", ac2},
        {"AC3", "non-ergodic mixture: four estimates within 0.03 of 0.500402", ac3},
        {"AC4", "quantized Lebesgue MRID, IDR and mdim in [0.95, 1.05], |mrid - idr| <= 0.05",
         [] { return scenario_all("mrid-idr-thm11", 180.0); }},
        {"AC5", "R(14 eps) <= windowed R(eps) <= R(eps) with bracket-safe comparisons",
         [] { return scenario_all("rd-inequality-21", 600.0); }},
        {"AC6", "rdim <= MRID and R_L1(2 eps) <= ks upper on 20 random measures", ac6},
        {"AC7", "Blahut-Arimoto vs closed form and brute-force grid search", ac7},
        {"AC8", "combinatorial invariant suites", ac8},
    };
    const std::set<std::string> only(argv + 1, argv + argc);
    bool all_pass = true;
    for (const auto& c : all) {
        if (!only.empty() && !only.count(c.name)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        all_pass = all_pass && o.pass;
        std::cout << fmt::format("{} {} {} | {} ({:.1f} s)", c.name, o.pass ? "PASS" : "FAIL", c.text, o.detail, secs)
                  << std::endl;
    }
    return all_pass ? 0 : 1;
}

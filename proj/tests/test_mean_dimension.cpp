#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "erl/error.hpp"
#include "erl/mean_dimension.hpp"

using namespace erl;

namespace {

auto full(std::size_t k) { return std::make_shared<const ShiftSystem>(ShiftSystem::full(k)); }

std::vector<double> dyadic(int from, int to) {
    std::vector<double> g;
    for (int j = from; j <= to; ++j) g.push_back(std::ldexp(1.0, -j));
    return g;
}

std::vector<std::size_t> powers(int from, int to) {
    std::vector<std::size_t> g;
    for (int j = from; j <= to; ++j) g.push_back(std::size_t{1} << j);
    return g;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an erl::Error";
    return ErrorCode::Config;
}

// Exact minimal spanning and maximal separated sizes by subset search.
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

}  // namespace

TEST(TopologicalEntropy, Examples) {
    const auto f2 = ShiftSystem::full(2);
    EXPECT_NEAR(topological_eps_entropy(f2, 0.5, {1, 4, 10}).upper, std::log(2.0), 1e-12);

    const auto gm = ShiftSystem::golden_mean();
    const auto g = topological_eps_entropy(gm, 0.5, {10, 50, 200});
    EXPECT_EQ(g.kind, EntropyEstimate::Kind::Exact);
    EXPECT_NEAR(g.upper, 0.481212, 1e-3);
    EXPECT_GT(g.per_n[0].upper, g.per_n[1].upper);
    EXPECT_EQ(g.per_n[0].count_upper, 144.0);  // Fibonacci

    const auto cube = ShiftSystem::quantized_cube(16);
    EXPECT_NEAR(topological_eps_entropy(cube, 1.0 / 16, {3}).upper, 2.772589, 1e-6);
}

TEST(TopologicalEntropy, BracketOutsideDiscreteRegime) {
    const auto cube = ShiftSystem::quantized_cube(4);
    for (double eps : {0.3, 0.6, 1.0}) {
        const auto e = topological_eps_entropy(cube, eps, {1, 2, 3});
        EXPECT_EQ(e.kind, EntropyEstimate::Kind::Bracket);
        for (const auto& pt : e.per_n) {
            EXPECT_LE(pt.count_lower, pt.count_upper) << eps;
            EXPECT_LE(pt.upper, std::log(4.0) + 1e-12);
        }
    }
    EXPECT_EQ(code_of([&] { topological_eps_entropy(cube, 0.0, {1}); }), ErrorCode::InvalidInput);
    EXPECT_EQ(code_of([&] { topological_eps_entropy(cube, 0.3, {30}, {.cap = 1000}); }),
              ErrorCode::CapExceeded);
}

// r(eps) <= s(eps) <= r(eps/2) on words, exhaustively for n <= 8.
TEST(TopologicalEntropy, SpanningSeparatedSandwichExhaustive) {
    const std::vector<ShiftSystem> systems{ShiftSystem::full(2, 6), ShiftSystem::golden_mean(6),
                                           ShiftSystem::quantized_cube(3, 6)};
    for (const auto& sys : systems)
        for (std::size_t n = 1; n <= 8; ++n) {
            const auto words = enumerate_words(sys, n);
            if (words.size() > 600) continue;
            for (double eps : {0.05, 0.2, 0.45, 0.7, 1.1, 1.6, 2.5}) {
                const auto sep = greedy_separated_count(sys, words, eps);
                const auto span = greedy_spanning_count(sys, words, eps);
                const auto span_half = greedy_spanning_count(sys, words, eps / 2);
                // A maximal separated set spans, and each eps/2-ball holds at most one separated word.
                EXPECT_LE(sep, span_half) << n << ' ' << eps;
                EXPECT_LE(span, words.size());
                EXPECT_GE(sep, 1u);
                if (words.size() <= 12) {
                    const auto [r, s] = exact_span_sep(sys, words, eps, eps);
                    const auto [r_half, s_unused] = exact_span_sep(sys, words, eps / 2, eps);
                    EXPECT_LE(r, span);
                    EXPECT_LE(sep, s);
                    EXPECT_LE(s, r_half) << n << ' ' << eps;
                }
            }
        }
}

TEST(TopologicalEntropy, MonotoneInEps) {
    const auto cube = ShiftSystem::quantized_cube(4, 8);
    double prev_up = 1e9;
    for (double eps : {0.05, 0.2, 0.4, 0.8, 1.6}) {
        const auto e = topological_eps_entropy(cube, eps, {3});
        EXPECT_LE(e.upper, prev_up + 1e-12) << eps;
        prev_up = e.upper;
    }
}

TEST(MetricMeanDimension, QuantizedCubeSlopeIsOne) {
    const auto d = metric_mean_dimension_cube(powers(4, 10), {1, 4});
    EXPECT_NEAR(d.slope_upper, 1.0, 0.05);
    EXPECT_NEAR(d.slope_lower, 1.0, 0.05);
    for (double r : d.ratio_upper) EXPECT_NEAR(r, 1.0, 1e-12);
}

TEST(MetricMeanDimension, FiniteAlphabetAndSingleton) {
    const auto d = metric_mean_dimension(ShiftSystem::full(2), dyadic(2, 8), {6});
    EXPECT_NEAR(d.slope_upper, 0.0, 1e-12);
    EXPECT_LT(d.endpoint_upper, 0.2);
    const auto one = metric_mean_dimension(ShiftSystem::full(1), dyadic(2, 8), {6});
    EXPECT_EQ(one.upper, 0.0);
    EXPECT_EQ(one.slope_upper, 0.0);
}

TEST(MetricMeanDimension, GridValidation) {
    EXPECT_EQ(code_of([] { metric_mean_dimension(ShiftSystem::full(2), dyadic(2, 4), {2}); }),
              ErrorCode::InvalidInput);
    EXPECT_EQ(code_of([] { metric_mean_dimension(ShiftSystem::full(2), {0.01, 0.1, 0.001}, {2}); }),
              ErrorCode::InvalidInput);
    ScalingCurve bad;
    bad.points = {{0.1, 1.0, 0.5}};
    EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::InvalidInput);
}

TEST(Mrid, Examples) {
    const auto leb = mrid(CubeMeasure::lebesgue(), powers(4, 10));
    for (double r : leb.ratio_upper) EXPECT_NEAR(r, 1.0, 1e-9);
    EXPECT_NEAR(leb.slope_upper, 1.0, 1e-9);

    const auto b = ShiftMeasure::bernoulli(full(2), {0.3, 0.7});
    const auto fixed = mrid(b, dyadic(3, 10));
    EXPECT_NEAR(fixed.slope_upper, 0.0, 1e-12);
    EXPECT_LT(fixed.endpoint_upper, 0.1);
    for (std::size_t i = 1; i < fixed.ratio_upper.size(); ++i)
        EXPECT_LT(fixed.ratio_upper[i], fixed.ratio_upper[i - 1]);

    const auto dirac = ShiftMeasure::bernoulli(full(2), {1.0, 0.0});
    EXPECT_EQ(mrid(dirac, dyadic(3, 10)).upper, 0.0);
}

TEST(InformationDimensionRate, Examples) {
    const auto leb = information_dimension_rate(CubeMeasure::lebesgue(), powers(4, 10));
    for (double r : leb.ratio_upper) EXPECT_NEAR(r, 1.0, 1e-12);

    const auto two = information_dimension_rate(CubeMeasure::atoms({{0.0, 0.5}, {0.5, 0.5}}), powers(4, 10));
    for (std::size_t i = 0; i < two.curve.points.size(); ++i)
        EXPECT_NEAR(two.curve.points[i].upper, std::log(2.0), 1e-12);
    EXPECT_NEAR(two.endpoint_upper, 0.1, 1e-12);

    EXPECT_EQ(information_dimension_rate(CubeMeasure::point_mass(0.3), powers(4, 10)).upper, 0.0);

    const auto b = ShiftMeasure::bernoulli(full(2), {0.5, 0.5});
    EXPECT_EQ(code_of([&] { information_dimension_rate(b, powers(4, 10)); }), ErrorCode::NotQuantizable);
}

TEST(InformationDimensionRate, MatchesMridOnMatchedGrid) {
    // Non-ergodic: half Lebesgue, half a quantized Bernoulli on two atoms.
    const CubeMeasure mix({0.5, 0.5}, {CubeMarginal{1.0, {}}, CubeMarginal{0.0, {{0.25, 0.3}, {0.75, 0.7}}}});
    for (const auto* m : {&mix}) {
        const auto grid = powers(4, 10);
        const auto a = mrid(*m, grid);
        const auto b = information_dimension_rate(*m, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(a.ratio_upper[i], b.ratio_upper[i], 0.05);
    }
}

TEST(Rdim, FiniteAlphabetAndDirac) {
    const auto b = ShiftMeasure::bernoulli(full(2), {0.3, 0.7});
    const auto d = rdim(b, dyadic(6, 12), {});
    EXPECT_LT(d.slope_upper, 0.05);
    EXPECT_LT(d.endpoint_upper, 0.1);
    const auto dirac = ShiftMeasure::bernoulli(full(2), {1.0, 0.0});
    EXPECT_EQ(rdim(dirac, dyadic(3, 8), {}).upper, 0.0);
}

TEST(Rdim, QuantizedLebesgueSlopeNearOne) {
    RateDistortionOptions o;
    o.ba.tolerance = 1e-6;
    RdimRequest rq;
    rq.jobs = 4;
    const auto d = rdim(CubeMeasure::lebesgue().quantize(64), dyadic(3, 6), rq, o);
    EXPECT_NEAR(d.slope_upper, 1.0, 0.1);
}

// rdim(L^p) <= MRID and R_{L^1}(2 eps) <= ks upper at eps, on random measures.
TEST(Enclosure, RandomMeasures) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    const auto grid = dyadic(2, 7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t k = 2 + trial % 2;
        std::vector<double> v(trial % 3 == 0 ? k * k : k);
        for (auto& x : v) x = u(rng);
        for (std::size_t r = 0; r < v.size() / k; ++r) {
            double s = 0;
            for (std::size_t c = 0; c < k; ++c) s += v[r * k + c];
            for (std::size_t c = 0; c < k; ++c) v[r * k + c] /= s;
        }
        const auto m = v.size() == k ? ShiftMeasure::bernoulli(full(k), v) : ShiftMeasure::markov(full(k), v);
        const auto ks = mrid(m, grid);
        for (double p : {1.0, 2.0}) {
            RdimRequest rq;
            rq.p = p;
            rq.block_length = 2;
            const auto rd = rdim(m, grid, rq);
            for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_LE(rd.ratio_lower[i], ks.ratio_upper[i] + 1e-9);
            EXPECT_LE(rd.floor_upper, ks.upper + 1e-9);
            EXPECT_LE(rd.floor_lower, ks.lower + 1e-9);
        }
        for (double eps : grid) {
            const auto r = rate_distortion_function(m, make_spec(RDFamily::Lp, 1.0, 2 * eps, 0, 2));
            EXPECT_LE(r.certified_lower, ks_eps_entropy(m, eps, {.rd_lower = false}).upper + 1e-9);
        }
    }
}

// The uniform Bernoulli measure attains the topological entropy.
TEST(VariationalPrinciple, UniformAttainsTopologicalEntropy) {
    for (std::size_t k : {2u, 3u}) {
        const auto top = topological_eps_entropy(ShiftSystem::full(k), 0.5, {8}).upper;
        double best = 0.0, at_uniform = 0.0;
        std::mt19937_64 rng(k);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int t = 0; t < 50; ++t) {
            std::vector<double> p(k);
            double s = 0;
            for (auto& x : p) s += (x = (t == 0 ? 1.0 : u(rng)));
            for (auto& x : p) x /= s;
            const double h = ks_eps_entropy(ShiftMeasure::bernoulli(full(k), p), 0.5, {.rd_lower = false}).upper;
            if (t == 0) at_uniform = h;
            best = std::max(best, h);
            EXPECT_LE(h, top + 1e-12);
        }
        EXPECT_NEAR(best, top, 0.02);
        EXPECT_EQ(best, at_uniform);
    }
}

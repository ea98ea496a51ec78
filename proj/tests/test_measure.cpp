#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numeric>
#include <random>

#include "erl/error.hpp"
#include "erl/info.hpp"
#include "erl/measure.hpp"

using namespace erl;

namespace {

auto full2() { return std::make_shared<const ShiftSystem>(ShiftSystem::full(2)); }

Word w(std::initializer_list<int> s) {
    Word out;
    for (int v : s) out.push_back(static_cast<Symbol>(v));
    return out;
}

std::vector<ShiftMeasure> sample_measures() {
    std::vector<ShiftMeasure> out;
    out.push_back(ShiftMeasure::bernoulli(full2(), {0.3, 0.7}));
    out.push_back(ShiftMeasure::markov(full2(), {0.9, 0.1, 0.5, 0.5}));
    out.push_back(ShiftMeasure::markov(std::make_shared<const ShiftSystem>(ShiftSystem::golden_mean()),
                                       {0.6, 0.4, 1.0, 0.0}));
    out.push_back(ShiftMeasure::mixture(
        {0.5, 0.5}, {ShiftMeasure::bernoulli(full2(), {0.2, 0.8}), ShiftMeasure::bernoulli(full2(), {0.8, 0.2})}));
    out.push_back(ShiftMeasure::markov(std::make_shared<const ShiftSystem>(ShiftSystem::full(3)),
                                       {0.2, 0.5, 0.3, 0.1, 0.1, 0.8, 0.6, 0.3, 0.1}));
    return out;
}

}  // namespace

TEST(CylinderMass, BernoulliProduct) {
    const auto m = ShiftMeasure::bernoulli(full2(), {0.3, 0.7});
    EXPECT_NEAR(m.cylinder_mass(w({0, 1, 0})), 0.063, 1e-15);
}

TEST(CylinderMass, MarkovStationaryStart) {
    const auto m = ShiftMeasure::markov(full2(), {0.9, 0.1, 0.5, 0.5});
    EXPECT_NEAR(m.stationary()[0], 5.0 / 6.0, 1e-12);
    EXPECT_NEAR(m.stationary()[1], 1.0 / 6.0, 1e-12);
    EXPECT_NEAR(m.cylinder_mass(w({0, 0})), 0.75, 1e-12);
}

TEST(CylinderMass, InadmissibleWord) {
    const auto gm = std::make_shared<const ShiftSystem>(ShiftSystem::golden_mean());
    const auto m = ShiftMeasure::markov(gm, {0.5, 0.5, 1.0, 0.0});
    try {
        m.cylinder_mass(w({0, 1, 1}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InadmissibleWord);
    }
}

TEST(ShiftMeasure, MarkovMustRespectForbiddenTransitions) {
    const auto gm = std::make_shared<const ShiftSystem>(ShiftSystem::golden_mean());
    EXPECT_THROW(ShiftMeasure::markov(gm, {0.5, 0.5, 0.5, 0.5}), Error);
    EXPECT_THROW(ShiftMeasure::markov(full2(), {0.5, 0.6, 0.5, 0.5}), Error);
    EXPECT_THROW(ShiftMeasure::bernoulli(full2(), {0.5, 0.4}), Error);
}

TEST(EntropyRate, ClosedForms) {
    EXPECT_NEAR(ShiftMeasure::bernoulli(full2(), {0.5, 0.5}).entropy_rate(), 0.693147, 1e-6);
    EXPECT_NEAR(ShiftMeasure::bernoulli(full2(), {0.3, 0.7}).entropy_rate(), 0.610864, 1e-6);
    EXPECT_NEAR(ShiftMeasure::markov(full2(), {0.9, 0.1, 0.5, 0.5}).entropy_rate(), 0.386427, 1e-6);
    const double oracle = 5.0 / 6.0 * binary_entropy(0.1) + 1.0 / 6.0 * binary_entropy(0.5);
    EXPECT_NEAR(ShiftMeasure::markov(full2(), {0.9, 0.1, 0.5, 0.5}).entropy_rate(), oracle, 1e-12);
}

TEST(EntropyRate, MixtureIsAverageOfComponents) {
    const auto m = ShiftMeasure::mixture(
        {0.5, 0.5}, {ShiftMeasure::bernoulli(full2(), {0.2, 0.8}), ShiftMeasure::bernoulli(full2(), {0.8, 0.2})});
    EXPECT_NEAR(m.entropy_rate(), 0.500402, 1e-6);
}

TEST(CylinderMass, SumsToOneAndShiftInvariantExhaustive) {
    for (const auto& m : sample_measures()) {
        for (std::size_t n = 1; n <= 8; ++n) {
            const auto words = enumerate_words(m.system(), n);
            double total = 0.0;
            for (std::size_t i = 0; i < words.size(); ++i) total += m.cylinder_mass(words[i]);
            EXPECT_NEAR(total, 1.0, 1e-9) << m.describe() << " n=" << n;
            if (n == 8) continue;
            for (std::size_t i = 0; i < words.size(); ++i) {
                const auto x = words[i];
                double left = 0.0, right = 0.0;
                for (std::size_t a = 0; a < m.alphabet_size(); ++a) {
                    Word l{static_cast<Symbol>(a)};
                    l.insert(l.end(), x.begin(), x.end());
                    Word r(x.begin(), x.end());
                    r.push_back(static_cast<Symbol>(a));
                    if (m.system().is_admissible(l)) left += m.cylinder_mass(l);
                    if (m.system().is_admissible(r)) right += m.cylinder_mass(r);
                }
                EXPECT_NEAR(left, m.cylinder_mass(x), 1e-12);
                EXPECT_NEAR(right, m.cylinder_mass(x), 1e-12);
            }
        }
    }
}

TEST(SampleOrbit, DiracDeterministicAndLawOfLargeNumbers) {
    const auto dirac = ShiftMeasure::bernoulli(full2(), {1.0, 0.0});
    for (auto s : dirac.sample_orbit(50, 3)) EXPECT_EQ(s, 0);

    const auto fair = ShiftMeasure::bernoulli(full2(), {0.5, 0.5});
    EXPECT_EQ(fair.sample_orbit(100, 42), fair.sample_orbit(100, 42));
    EXPECT_NE(fair.sample_orbit(100, 42), fair.sample_orbit(100, 43));
    const auto x = fair.sample_orbit(10000, 1);
    const double ones = std::accumulate(x.begin(), x.end(), 0.0) / 1e4;
    EXPECT_NEAR(ones, 0.5, 0.02);
}

TEST(SampleOrbit, MarkovPairFrequencies) {
    const auto m = ShiftMeasure::markov(full2(), {0.9, 0.1, 0.5, 0.5});
    const auto x = m.sample_orbit(200000, 5);
    double n00 = 0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) n00 += (x[i] == 0 && x[i + 1] == 0);
    EXPECT_NEAR(n00 / (x.size() - 1), 0.75, 0.01);
}

TEST(Stationary, MatchesPowerIterationOnRandomChains) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t k = 2 + trial % 4;
        std::vector<double> P(k * k);
        for (std::size_t a = 0; a < k; ++a) {
            double row = 0;
            for (std::size_t b = 0; b < k; ++b) row += (P[a * k + b] = u(rng));
            for (std::size_t b = 0; b < k; ++b) P[a * k + b] /= row;
        }
        const auto pi = stationary_distribution(P, k);
        for (std::size_t b = 0; b < k; ++b) {
            double v = 0;
            for (std::size_t a = 0; a < k; ++a) v += pi[a] * P[a * k + b];
            EXPECT_NEAR(v, pi[b], 1e-12);
        }
    }
}

TEST(CubeMeasure, QuantizedLebesgueIsUniform) {
    const auto q = CubeMeasure::lebesgue().quantize(8);
    EXPECT_EQ(q.kind(), ShiftMeasure::Kind::Bernoulli);
    for (double p : q.probabilities()) EXPECT_NEAR(p, 0.125, 1e-15);
    EXPECT_NEAR(q.entropy_rate(), std::log(8.0), 1e-12);
}

TEST(CubeMeasure, AtomsLandInCells) {
    const auto c = CubeMeasure::atoms({{0.0, 0.5}, {0.5, 0.5}});
    const auto masses = c.cell_masses(0, 4);
    EXPECT_DOUBLE_EQ(masses[0], 0.5);
    EXPECT_DOUBLE_EQ(masses[2], 0.5);
    const auto top = CubeMeasure::point_mass(1.0).cell_masses(0, 4);
    EXPECT_DOUBLE_EQ(top[3], 1.0);
}

TEST(MeasureJson, RoundTrip) {
    for (const auto& m : sample_measures()) {
        const auto back = measure_from_json(measure_to_json(m), m.system_ptr());
        EXPECT_NEAR(back.entropy_rate(), m.entropy_rate(), 1e-12);
    }
    const auto cube = cube_measure_from_json(nlohmann::json::parse(
        R"({"kind":"cube","components":[{"weight":0.5,"lebesgue":1},{"weight":0.5,"atoms":[[0.25,1]]}]})"));
    EXPECT_EQ(cube.components().size(), 2u);
}

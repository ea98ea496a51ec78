#include "erl/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>

#include "erl/error.hpp"
#include "erl/info.hpp"
#include "erl/parallel.hpp"

namespace erl {

// =============================================================================
// PartitionFamily
// =============================================================================

PartitionFamily PartitionFamily::alphabet(const ShiftSystem& system, std::size_t window) {
    PartitionFamily f;
    f.base_cells = system.alphabet().size();
    f.window = window;
    f.cell_diameter = 0.0;
    const double tail = std::ldexp(1.0, 1 - static_cast<int>(window));
    f.diameter_bound = f.cell_diameter * (3.0 - tail) + tail * system.alphabet().diameter();
    return f;
}

PartitionFamily PartitionFamily::whole_space(const ShiftSystem& system) {
    PartitionFamily f;
    f.base_cells = 1;
    f.trivial = true;
    f.diameter_bound = 3.0 * system.alphabet().diameter();
    return f;
}

std::optional<PartitionFamily> PartitionFamily::finest_fit(const ShiftSystem& system, double eps,
                                                           std::size_t max_window) {
    for (std::size_t n = 0; n <= max_window; ++n) {
        auto f = alphabet(system, n);
        if (f.diameter_bound <= eps) return f;
    }
    return std::nullopt;
}

std::string PartitionFamily::describe() const {
    std::ostringstream os;
    if (trivial) os << "trivial partition, diameter <= " << diameter_bound;
    else os << base_cells << "-cell alphabet partition, window N=" << window << ", diameter <= " << diameter_bound;
    return os.str();
}

const char* to_string(EntropyEstimate::Kind kind) noexcept {
    switch (kind) {
        case EntropyEstimate::Kind::Exact: return "exact";
        case EntropyEstimate::Kind::Upper: return "upper";
        case EntropyEstimate::Kind::Lower: return "lower";
        case EntropyEstimate::Kind::Bracket: return "bracket";
    }
    return "?";
}

// =============================================================================
// Block entropy and the KS bracket
// =============================================================================

double block_entropy(const ShiftMeasure& measure, const PartitionFamily& family, std::size_t n,
                     std::size_t cap) {
    if (n == 0) throw Error(ErrorCode::InvalidInput, "block length must be positive");
    if (family.trivial) return 0.0;
    const std::size_t len = n + 2 * family.window;
    const double L = static_cast<double>(len);
    switch (measure.kind()) {
        case ShiftMeasure::Kind::Bernoulli: return L * shannon_entropy(measure.probabilities());
        case ShiftMeasure::Kind::Markov:
            return shannon_entropy(measure.stationary()) + (L - 1.0) * measure.entropy_rate();
        case ShiftMeasure::Kind::Mixture: break;
    }
    if (measure.is_exchangeable() && measure.system().is_full() && measure.alphabet_size() == 2) {
        const auto law = weight_class_law(measure, len);
        double h = 0.0;
        for (std::size_t a = 0; a <= len; ++a)
            if (law[a] > 0.0)
                h += law[a] * (std::lgamma(L + 1.0) - std::lgamma(a + 1.0) - std::lgamma(L - a + 1.0) - std::log(law[a]));
        return h;
    }
    const auto words = enumerate_words(measure.system(), len, cap);
    double h = 0.0;
    for (std::size_t i = 0; i < words.size(); ++i) {
        const double m = measure.cylinder_mass(words[i]);
        if (m > 0.0) h -= m * std::log(m);
    }
    return h;
}

EntropyEstimate ks_eps_entropy(const ShiftMeasure& measure, double eps, const KsOptions& options) {
    if (!(eps > 0.0)) throw Error(ErrorCode::InvalidInput, "epsilon must be positive");
    const auto& sys = measure.system();
    EntropyEstimate est;
    est.kind = EntropyEstimate::Kind::Bracket;

    // Every alphabet-window family has the same rate h_mu(T, alpha), which the
    // alphabet partition generates, so the exact rate is the entropy rate.
    const auto whole = PartitionFamily::whole_space(sys);
    const auto fit = PartitionFamily::finest_fit(sys, eps, options.max_window);
    if (whole.diameter_bound <= eps) {
        est.upper = 0.0;
        est.note = whole.describe();
    } else if (fit) {
        est.upper = measure.entropy_rate();
        est.note = fit->describe();
    } else {
        throw Error(ErrorCode::NoFamilyFits, "no partition family reaches diameter " + std::to_string(eps));
    }

    if (options.rd_lower && est.upper > 0.0) {
        const double a = sys.alphabet().diameter();
        // At 2 eps >= diam the single-coordinate constraint is met by any
        // constant, so the bound is 0.
        if (2.0 * eps < a) {
            DistortionSpec spec{LpAverage{1.0, 2.0 * eps}, options.rd_block_length};
            const auto r = rate_distortion_function(measure, spec, options.rd);
            est.lower = r.certified_lower;
            est.n_used = options.rd_block_length;
        }
    }
    return est;
}

// =============================================================================
// Covers
// =============================================================================

bool discrete_regime(const ShiftSystem& system, double eps) {
    const double dmin = system.alphabet().min_distance();
    return system.alphabet().size() == 1 || (eps <= dmin && eps > system.tail_bound());
}

namespace {

struct WeightedWords {
    WordList words;
    std::vector<double> mass;
};

WeightedWords weighted_words(const ShiftMeasure& measure, std::size_t n, std::size_t cap) {
    WeightedWords w{enumerate_words(measure.system(), n, cap), {}};
    w.mass.resize(w.words.size());
    for (std::size_t i = 0; i < w.words.size(); ++i) w.mass[i] = measure.cylinder_mass(w.words[i]);
    return w;
}

// Fewest of the given masses, heaviest first, whose total exceeds 1 - delta.
std::size_t heaviest_count(std::vector<double> mass, double delta) {
    std::stable_sort(mass.begin(), mass.end(), std::greater<>());
    const double need = 1.0 - delta;
    double total = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
        total += mass[i];
        if (total - need > 1e-12) return i + 1;
    }
    return mass.size();
}

// balls[c] lists the words within the ball around word c.
using Balls = std::vector<std::vector<std::uint32_t>>;

std::pair<Balls, Balls> bowen_balls(const ShiftSystem& sys, const WordList& words, double eps, std::size_t jobs) {
    const std::size_t n = words.size();
    Balls certain(n), possible(n);
    // Row-wise so each task writes only its own lists; the metric is
    // symmetric, but recomputation keeps the tasks independent.
    parallel_for(n, jobs, [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto b = bowen_distance(sys, words[i], words[j]);
            if (b.lower < eps) possible[i].push_back(static_cast<std::uint32_t>(j));
            if (b.upper < eps) certain[i].push_back(static_cast<std::uint32_t>(j));
        }
    });
    return {std::move(certain), std::move(possible)};
}

// Greedy partial cover: repeatedly take the ball with most uncovered mass
// (ties to the lower index) until the covered mass exceeds 1 - delta. Lazy
// evaluation is exact because gains only shrink.
std::size_t greedy_cover(const Balls& balls, const std::vector<double>& mass, double delta) {
    const double need = 1.0 - delta;
    std::vector<char> covered(mass.size(), 0);
    auto gain = [&](std::size_t c) {
        double g = 0.0;
        for (auto y : balls[c])
            if (!covered[y]) g += mass[y];
        return g;
    };
    using Item = std::pair<double, std::size_t>;
    auto worse = [](const Item& a, const Item& b) {
        return a.first < b.first || (a.first == b.first && a.second > b.second);
    };
    std::priority_queue<Item, std::vector<Item>, decltype(worse)> heap(worse);
    for (std::size_t c = 0; c < balls.size(); ++c) heap.emplace(gain(c), c);
    double total = 0.0;
    std::size_t picks = 0;
    while (total - need <= 1e-12 && !heap.empty()) {
        auto [g, c] = heap.top();
        heap.pop();
        const double fresh = gain(c);
        if (fresh < g && !heap.empty() && worse(Item{fresh, c}, heap.top())) {
            heap.emplace(fresh, c);
            continue;
        }
        if (fresh <= 0.0) break;
        for (auto y : balls[c])
            if (!covered[y]) covered[y] = 1, total += mass[y];
        ++picks;
    }
    if (total - need <= 1e-12) throw Error(ErrorCode::InvalidInput, "balls cannot cover the required mass");
    return picks;
}

void check_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidInput, "delta must lie in (0,1)");
}

}  // namespace

EntropyEstimate katok_eps_entropy(const ShiftMeasure& measure, double eps, double delta,
                                  const std::vector<std::size_t>& n_list, const CoverOptions& options) {
    check_delta(delta);
    if (!(eps > 0.0)) throw Error(ErrorCode::InvalidInput, "epsilon must be positive");
    if (n_list.empty()) throw Error(ErrorCode::InvalidInput, "n list is empty");
    const auto& sys = measure.system();
    const bool discrete = discrete_regime(sys, eps);
    if (!discrete && eps <= sys.tail_bound())
        throw Error(ErrorCode::InvalidInput, "epsilon is below the window tail bound");

    EntropyEstimate est;
    est.kind = discrete ? EntropyEstimate::Kind::Exact : EntropyEstimate::Kind::Bracket;
    est.delta_used = delta;
    for (std::size_t n : n_list) {
        if (n == 0) throw Error(ErrorCode::InvalidInput, "block length must be positive");
        const auto ww = weighted_words(measure, n, options.cap);
        EstimatePoint pt;
        pt.n = n;
        const double nn = static_cast<double>(n);
        if (discrete) {
            pt.count_lower = pt.count_upper = static_cast<double>(heaviest_count(ww.mass, delta));
        } else {
            if (static_cast<double>(ww.words.size()) * ww.words.size() > static_cast<double>(options.cap))
                throw Error(ErrorCode::CapExceeded, "Bowen-ball table exceeds the enumeration cap");
            const auto [certain, possible] = bowen_balls(sys, ww.words, eps, options.jobs);
            pt.count_upper = static_cast<double>(greedy_cover(certain, ww.mass, delta));
            const double factor = 1.0 + std::log(static_cast<double>(ww.words.size()));
            pt.count_lower = std::max(1.0, greedy_cover(possible, ww.mass, delta) / factor);
        }
        pt.lower = std::log(pt.count_lower) / nn;
        pt.upper = std::log(pt.count_upper) / nn;
        est.per_n.push_back(pt);
    }
    est.lower = est.per_n.back().lower;
    est.upper = est.per_n.back().upper;
    est.n_used = est.per_n.back().n;
    est.note = discrete ? "heaviest cylinders" : "greedy cover over bracketed Bowen balls";
    return est;
}

EntropyEstimate shapira_count(const ShiftMeasure& measure, double eps, double delta, std::size_t n,
                              const CoverOptions& options) {
    check_delta(delta);
    if (n == 0) throw Error(ErrorCode::InvalidInput, "block length must be positive");
    const auto& sys = measure.system();
    const auto& alpha = sys.alphabet();
    const double group_diam = (eps - sys.tail_bound()) / 3.0;
    if (!(group_diam >= 0.0)) throw Error(ErrorCode::InvalidInput, "epsilon is below the window tail bound");

    // Greedy grouping in index order: a symbol joins the first group whose
    // members are all within group_diam of it.
    std::vector<std::vector<Symbol>> groups;
    std::vector<Symbol> group_of(alpha.size());
    for (std::size_t a = 0; a < alpha.size(); ++a) {
        bool placed = false;
        for (std::size_t g = 0; g < groups.size() && !placed; ++g) {
            const bool fits = std::all_of(groups[g].begin(), groups[g].end(), [&](Symbol b) {
                return alpha.distance(static_cast<Symbol>(a), b) <= group_diam;
            });
            if (fits) groups[g].push_back(static_cast<Symbol>(a)), group_of[a] = static_cast<Symbol>(g), placed = true;
        }
        if (!placed) {
            groups.push_back({static_cast<Symbol>(a)});
            group_of[a] = static_cast<Symbol>(groups.size() - 1);
        }
    }

    const auto ww = weighted_words(measure, n, options.cap);
    std::map<Word, double> cells;
    Word key(n);
    for (std::size_t i = 0; i < ww.words.size(); ++i) {
        const auto x = ww.words[i];
        for (std::size_t j = 0; j < n; ++j) key[j] = group_of[x[j]];
        cells[key] += ww.mass[i];
    }
    std::vector<double> mass;
    mass.reserve(cells.size());
    for (const auto& [k, m] : cells) mass.push_back(m);

    EntropyEstimate est;
    est.kind = EntropyEstimate::Kind::Exact;
    const double count = static_cast<double>(heaviest_count(mass, delta));
    est.lower = est.upper = std::log(count) / static_cast<double>(n);
    est.per_n.push_back({n, est.lower, est.upper, count, count});
    est.n_used = n;
    est.delta_used = delta;
    est.note = std::to_string(groups.size()) + " alphabet groups";
    return est;
}

EntropyEstimate brin_katok_local(const ShiftMeasure& measure, double eps, std::size_t n, std::size_t samples,
                                 std::uint64_t seed, const CoverOptions& options) {
    if (samples == 0) throw Error(ErrorCode::InvalidInput, "samples must be >= 1");
    if (n == 0) throw Error(ErrorCode::InvalidInput, "block length must be positive");
    const auto& sys = measure.system();
    const bool discrete = discrete_regime(sys, eps);
    if (!discrete && eps <= sys.tail_bound())
        throw Error(ErrorCode::InvalidInput, "epsilon is below the window tail bound");
    const double nn = static_cast<double>(n);

    std::optional<WeightedWords> ww;
    if (!discrete) ww = weighted_words(measure, n, options.cap);

    std::vector<double> lo(samples), hi(samples);
    parallel_for(samples, options.jobs, [&](std::size_t i) {
        const Word x = measure.sample_orbit(n, seed + i);
        if (discrete) {
            lo[i] = hi[i] = -measure.log_cylinder_mass(x) / nn;
            return;
        }
        double certain = 0.0, possible = 0.0;
        for (std::size_t j = 0; j < ww->words.size(); ++j) {
            const auto b = bowen_distance(sys, x, ww->words[j]);
            if (b.lower < eps) possible += ww->mass[j];
            if (b.upper < eps) certain += ww->mass[j];
        }
        lo[i] = -std::log(possible) / nn;
        hi[i] = -std::log(certain) / nn;
    });

    EntropyEstimate est;
    est.kind = discrete ? EntropyEstimate::Kind::Exact : EntropyEstimate::Kind::Bracket;
    est.lower = std::accumulate(lo.begin(), lo.end(), 0.0) / static_cast<double>(samples);
    est.upper = std::accumulate(hi.begin(), hi.end(), 0.0) / static_cast<double>(samples);
    // Exact per orbit; the Monte-Carlo mean is the estimate.
    est.n_used = n;
    est.samples_used = samples;
    est.note = discrete ? "cylinder masses" : "bracketed Bowen-ball masses";
    return est;
}

// =============================================================================
// Pfister-Sullivan
// =============================================================================

namespace {

double log_sum_exp(const std::vector<double>& terms) {
    if (terms.empty()) return -std::numeric_limits<double>::infinity();
    const double top = *std::max_element(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) s += std::exp(t - top);
    return top + std::log(s);
}

constexpr double kBoxSlack = 1e-12;

}  // namespace

EntropyEstimate pfister_sullivan(const ShiftMeasure& measure, double eps, double eta, std::size_t n,
                                 NeighborhoodKind kind, std::size_t cap) {
    if (n == 0) throw Error(ErrorCode::InvalidInput, "block length must be positive");
    if (!(eta >= 0.0)) throw Error(ErrorCode::InvalidInput, "eta must be >= 0");
    const auto& sys = measure.system();
    if (!discrete_regime(sys, eps))
        throw Error(ErrorCode::InvalidInput, "Pfister-Sullivan counting needs eps <= the alphabet's min distance");
    const std::size_t k = measure.alphabet_size();
    const double nn = static_cast<double>(n);
    const auto p = measure.marginal();

    std::vector<double> log_terms;
    if (kind == NeighborhoodKind::SymbolFrequencies && sys.is_full()) {
        // Sum multinomial coefficients over compositions inside the box.
        std::vector<long> lo(k), hi(k);
        for (std::size_t a = 0; a < k; ++a) {
            lo[a] = std::max(0L, static_cast<long>(std::ceil((p[a] - eta) * nn - kBoxSlack * nn)));
            hi[a] = std::min(static_cast<long>(n), static_cast<long>(std::floor((p[a] + eta) * nn + kBoxSlack * nn)));
        }
        std::vector<long> counts(k);
        const double base = std::lgamma(nn + 1.0);
        std::function<void(std::size_t, long, double)> rec = [&](std::size_t a, long left, double acc) {
            if (a + 1 == k) {
                if (left < lo[a] || left > hi[a]) return;
                log_terms.push_back(base - acc - std::lgamma(static_cast<double>(left) + 1.0));
                return;
            }
            for (long c = lo[a]; c <= std::min(hi[a], left); ++c)
                rec(a + 1, left - c, acc + std::lgamma(static_cast<double>(c) + 1.0));
        };
        rec(0, static_cast<long>(n), 0.0);
    } else {
        const auto words = enumerate_words(sys, n, cap);
        std::vector<double> target;
        if (kind == NeighborhoodKind::PairFrequencies) {
            if (n < 2) throw Error(ErrorCode::InvalidInput, "pair frequencies need n >= 2");
            target.resize(k * k);
            for (std::size_t a = 0; a < k; ++a)
                for (std::size_t b = 0; b < k; ++b) {
                    const Word ab{static_cast<Symbol>(a), static_cast<Symbol>(b)};
                    target[a * k + b] = sys.is_admissible(ab) ? measure.cylinder_mass(ab) : 0.0;
                }
        } else {
            target = p;
        }
        std::vector<double> freq(target.size());
        std::size_t passing = 0;
        for (std::size_t i = 0; i < words.size(); ++i) {
            const auto x = words[i];
            std::fill(freq.begin(), freq.end(), 0.0);
            if (kind == NeighborhoodKind::PairFrequencies) {
                for (std::size_t j = 0; j + 1 < n; ++j) freq[x[j] * k + x[j + 1]] += 1.0 / (nn - 1.0);
            } else {
                for (Symbol s : x) freq[s] += 1.0 / nn;
            }
            bool ok = true;
            for (std::size_t c = 0; c < freq.size() && ok; ++c) ok = std::abs(freq[c] - target[c]) <= eta + kBoxSlack;
            passing += ok;
        }
        if (passing > 0) log_terms.push_back(std::log(static_cast<double>(passing)));
    }
    if (log_terms.empty()) throw Error(ErrorCode::EmptyNeighborhood, "no n-word has frequencies within eta");

    EntropyEstimate est;
    est.kind = EntropyEstimate::Kind::Exact;
    est.lower = est.upper = std::max(0.0, log_sum_exp(log_terms) / nn);
    est.n_used = n;
    est.note = kind == NeighborhoodKind::PairFrequencies ? "pair-frequency box" : "symbol-frequency box";
    return est;
}

}  // namespace erl

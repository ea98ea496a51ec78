#include "erl/rate_distortion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "erl/error.hpp"
#include "erl/info.hpp"
#include "erl/parallel.hpp"

namespace erl {

// =============================================================================
// DistortionSpec
// =============================================================================

void DistortionSpec::validate() const {
    if (block_length == 0) throw Error(ErrorCode::InvalidInput, "block length must be positive");
    std::visit(
        [](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if (!(c.epsilon > 0.0) || !std::isfinite(c.epsilon))
                throw Error(ErrorCode::InvalidInput, "epsilon must be positive");
            if constexpr (std::is_same_v<T, LpAverage>) {
                if (!(c.p >= 1.0) || !std::isfinite(c.p)) throw Error(ErrorCode::InvalidInput, "p must be >= 1");
            } else if constexpr (std::is_same_v<T, LInfIndicator>) {
                if (!(c.s > 0.0 && c.s < 1.0)) throw Error(ErrorCode::InvalidInput, "s must lie in (0,1)");
            } else if constexpr (std::is_same_v<T, MistakeFraction>) {
                if (!(c.r > 0.0 && c.r < 1.0)) throw Error(ErrorCode::InvalidInput, "r must lie in (0,1)");
            }
        },
        condition);
}

double DistortionSpec::epsilon() const {
    return std::visit([](const auto& c) { return c.epsilon; }, condition);
}

double DistortionSpec::threshold() const {
    return std::visit(
        [](const auto& c) -> double {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, LpAverage>) return std::pow(c.epsilon, c.p);
            else if constexpr (std::is_same_v<T, LInfIndicator>) return c.s;
            else if constexpr (std::is_same_v<T, BowenMax>) return c.epsilon;
            else return c.r;
        },
        condition);
}

std::string DistortionSpec::name() const {
    std::ostringstream os;
    os.precision(10);
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, LpAverage>) os << "L" << c.p << "(eps=" << c.epsilon;
            else if constexpr (std::is_same_v<T, LInfIndicator>) os << "Linf(eps=" << c.epsilon << ",s=" << c.s;
            else if constexpr (std::is_same_v<T, BowenMax>) os << "Bowen(eps=" << c.epsilon;
            else os << "r(eps=" << c.epsilon << ",r=" << c.r;
        },
        condition);
    os << ",n=" << block_length << (metric == MetricMode::WindowedProduct ? ",windowed)" : ")");
    return os.str();
}

// =============================================================================
// Block distortion
// =============================================================================

DistortionTable::DistortionTable(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) throw Error(ErrorCode::InvalidInput, "distortion table has wrong size");
    for (double v : values_)
        if (!std::isfinite(v) || v < 0.0) throw Error(ErrorCode::InvalidInput, "distortions must be finite and >= 0");
}

double pair_distortion(const ShiftSystem& system, const DistortionSpec& spec, std::span<const Symbol> x,
                       std::span<const Symbol> y, bool upper) {
    if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "words differ in length");
    const std::size_t n = x.size();
    const auto& alphabet = system.alphabet();
    auto coord = [&](std::size_t k) {
        if (spec.metric == MetricMode::SingleCoordinate) return alphabet.distance(x[k], y[k]);
        const auto b = shifted_product_distance(system, x, y, k);
        return upper ? b.upper : b.lower;
    };
    return std::visit(
        [&](const auto& c) -> double {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, LpAverage>) {
                double sum = 0.0;
                for (std::size_t k = 0; k < n; ++k) sum += std::pow(coord(k), c.p);
                return sum / static_cast<double>(n);
            } else if constexpr (std::is_same_v<T, BowenMax>) {
                double m = 0.0;
                for (std::size_t k = 0; k < n; ++k) m = std::max(m, coord(k));
                return m;
            } else {
                std::size_t count = 0;
                for (std::size_t k = 0; k < n; ++k)
                    if (coord(k) >= c.epsilon) ++count;
                return static_cast<double>(count) / static_cast<double>(n);
            }
        },
        spec.condition);
}

BlockDistortion block_distortion(const ShiftSystem& system, const DistortionSpec& spec, std::size_t cap) {
    spec.validate();
    BlockDistortion out;
    out.words = enumerate_words(system, spec.block_length, cap);
    const std::size_t m = out.words.size();
    if (static_cast<double>(m) * static_cast<double>(m) > static_cast<double>(cap))
        throw Error(ErrorCode::CapExceeded, "block distortion table exceeds the enumeration cap");
    std::vector<double> lower(m * m), upper(m * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            lower[i * m + j] = pair_distortion(system, spec, out.words[i], out.words[j], false);
            upper[i * m + j] = spec.metric == MetricMode::SingleCoordinate
                                   ? lower[i * m + j]
                                   : pair_distortion(system, spec, out.words[i], out.words[j], true);
        }
    out.lower = DistortionTable(m, m, std::move(lower));
    out.upper = DistortionTable(m, m, std::move(upper));
    return out;
}

// =============================================================================
// Blahut-Arimoto engine
// =============================================================================

namespace {

// A BA instance over source classes a and output classes b. Each (a, b) cell
// holds terms (w, d): the fraction w of class-b outputs at distortion d from a
// fixed class-a input. A dense table is the special case of singleton classes
// with one term of weight 1 per cell.
class KernelProblem {
public:
    KernelProblem(std::vector<double> source, const DistortionTable& table)
        : source_(std::move(source)), rows_(table.rows()), cols_(table.cols()), dense_(&table.values()) {
        if (source_.size() != rows_) throw Error(ErrorCode::LengthMismatch, "source and table rows differ");
        finish();
    }
    KernelProblem(std::vector<double> source, std::size_t cols, std::vector<std::size_t> offsets,
                  std::vector<double> weights, std::vector<double> dists)
        : source_(std::move(source)),
          rows_(source_.size()),
          cols_(cols),
          offsets_(std::move(offsets)),
          weights_(std::move(weights)),
          dists_(std::move(dists)) {
        finish();
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const std::vector<double>& source() const { return source_; }
    const std::vector<std::size_t>& active() const { return active_; }
    double row_min(std::size_t a) const { return row_min_[a]; }
    double d_min() const { return d_min_; }

    template <class F>
    void for_terms(std::size_t a, std::size_t b, F&& f) const {
        if (dense_) {
            f(1.0, (*dense_)[a * cols_ + b]);
            return;
        }
        const std::size_t cell = a * cols_ + b;
        for (std::size_t t = offsets_[cell]; t < offsets_[cell + 1]; ++t) f(weights_[t], dists_[t]);
    }

    // Expected distortion of the constant reproduction b; its minimum over b is
    // the distortion at which the rate reaches 0.
    std::pair<double, std::size_t> d_max() const {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t b = 0; b < cols_; ++b) {
            double e = 0.0;
            for (std::size_t a : active_)
                for_terms(a, b, [&](double w, double d) { e += source_[a] * w * d; });
            if (e < best) best = e, arg = b;
        }
        return {best, arg};
    }

private:
    void finish() {
        validate_probabilities(source_, 1e-9);
        row_min_.assign(rows_, std::numeric_limits<double>::infinity());
        for (std::size_t a = 0; a < rows_; ++a) {
            if (source_[a] > 0.0) active_.push_back(a);
            for (std::size_t b = 0; b < cols_; ++b)
                for_terms(a, b, [&](double w, double d) {
                    if (w > 0.0) row_min_[a] = std::min(row_min_[a], d);
                });
        }
        d_min_ = 0.0;
        for (std::size_t a : active_) d_min_ += source_[a] * row_min_[a];
    }

    std::vector<double> source_;
    std::size_t rows_;
    std::size_t cols_;
    const std::vector<double>* dense_ = nullptr;
    std::vector<std::size_t> offsets_;
    std::vector<double> weights_;
    std::vector<double> dists_;
    std::vector<std::size_t> active_;
    std::vector<double> row_min_;
    double d_min_ = 0.0;
};

// exp(s (d - row_min)) summed over terms, and the same weighted by d. The row
// shift keeps A(x) away from underflow at steep slopes. masked: s -> -inf
// limit, keeping only the terms at the row minimum.
struct Kernel {
    double slope = 0.0;
    bool masked = false;
    std::vector<double> k;
    std::vector<double> kd;
};

Kernel build_kernel(const KernelProblem& prob, double slope, bool masked) {
    Kernel ker{slope, masked, std::vector<double>(prob.rows() * prob.cols(), 0.0),
               std::vector<double>(prob.rows() * prob.cols(), 0.0)};
    for (std::size_t a : prob.active()) {
        const double shift = prob.row_min(a);
        const double tol = 1e-12 * std::max(1.0, std::abs(shift));
        for (std::size_t b = 0; b < prob.cols(); ++b) {
            double k = 0.0, kd = 0.0;
            prob.for_terms(a, b, [&](double w, double d) {
                if (w <= 0.0) return;
                double e;
                if (masked) e = (d <= shift + tol) ? 1.0 : 0.0;
                else e = std::exp(slope * (d - shift));
                k += w * e;
                kd += w * e * d;
            });
            ker.k[a * prob.cols() + b] = k;
            ker.kd[a * prob.cols() + b] = kd;
        }
    }
    return ker;
}

struct FixedSlope {
    double distortion = 0.0;
    double rate = 0.0;        // nats per block
    double lower_base = 0.0;  // -sum p log A - max log c; add s * target for the dual bound
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> a;    // shifted A(x) at the final q
};

// Alternating minimization at a fixed slope, updating q in place. The dual gap
// max log c - sum q c log c bounds the suboptimality of the current q.
FixedSlope run_fixed_slope(const KernelProblem& prob, const Kernel& ker, std::vector<double>& q, double tolerance,
                           std::size_t max_iterations, std::vector<double>* lagrangian = nullptr) {
    const std::size_t cols = prob.cols();
    const auto& p = prob.source();
    std::vector<double> A(prob.rows(), 0.0), c(cols, 0.0);
    FixedSlope out;
    double shift_term = 0.0;  // sum p s row_min
    if (!ker.masked)
        for (std::size_t a : prob.active()) shift_term += p[a] * ker.slope * prob.row_min(a);

    auto compute = [&] {
        for (std::size_t a : prob.active()) {
            const double* row = &ker.k[a * cols];
            double s = 0.0;
            for (std::size_t b = 0; b < cols; ++b) s += q[b] * row[b];
            A[a] = std::max(s, std::numeric_limits<double>::min());
        }
        std::fill(c.begin(), c.end(), 0.0);
        for (std::size_t a : prob.active()) {
            const double* row = &ker.k[a * cols];
            const double f = p[a] / A[a];
            for (std::size_t b = 0; b < cols; ++b) c[b] += f * row[b];
        }
    };
    auto sum_p_log_a = [&] {
        double s = 0.0;
        for (std::size_t a : prob.active()) s += p[a] * std::log(A[a]);
        return s + shift_term;
    };

    double max_log_c = 0.0;
    for (std::size_t it = 0;; ++it) {
        compute();
        if (lagrangian) lagrangian->push_back(-sum_p_log_a());
        max_log_c = -std::numeric_limits<double>::infinity();
        double avg = 0.0;
        for (std::size_t b = 0; b < cols; ++b) {
            if (c[b] > 0.0) max_log_c = std::max(max_log_c, std::log(c[b]));
            if (q[b] > 0.0 && c[b] > 0.0) avg += q[b] * c[b] * std::log(c[b]);
        }
        const double gap = max_log_c - avg;
        out.iterations = it;
        if (gap <= tolerance) {
            out.converged = true;
            break;
        }
        if (it >= max_iterations) break;
        double total = 0.0;
        for (std::size_t b = 0; b < cols; ++b) total += (q[b] *= c[b]);
        for (auto& v : q) v /= total;
    }

    // Channel Q = q e^{s d} / A with output law q' = q c.
    double d = 0.0, qlogc = 0.0;
    for (std::size_t a : prob.active()) {
        const double* row = &ker.kd[a * cols];
        double s = 0.0;
        for (std::size_t b = 0; b < cols; ++b) s += q[b] * row[b];
        d += p[a] * s / A[a];
    }
    for (std::size_t b = 0; b < cols; ++b)
        if (q[b] > 0.0 && c[b] > 0.0) qlogc += q[b] * c[b] * std::log(c[b]);
    const double base = -sum_p_log_a();
    out.distortion = d;
    out.rate = std::max(0.0, (ker.masked ? 0.0 : ker.slope * d) + base - qlogc);
    out.lower_base = base - max_log_c;
    out.a = A;
    return out;
}

// Class-level channel mass G(a, b, term) = q_b e^{s(d - row_min)} / A_a for a
// time-shared channel lambda Q1 + (1 - lambda) Q2; returns (I, D) per block.
std::pair<double, double> time_shared(const KernelProblem& prob, const Kernel& k1, const std::vector<double>& q1,
                                      const std::vector<double>& a1, const Kernel& k2, const std::vector<double>& q2,
                                      const std::vector<double>& a2, double lambda) {
    const std::size_t cols = prob.cols();
    const auto& p = prob.source();
    auto g = [&](const Kernel& k, const std::vector<double>& q, const std::vector<double>& A, std::size_t a,
                 std::size_t b, double d) {
        const double e = k.masked ? (d <= prob.row_min(a) + 1e-12 * std::max(1.0, std::abs(prob.row_min(a))) ? 1.0 : 0.0)
                                  : std::exp(k.slope * (d - prob.row_min(a)));
        return q[b] * e / A[a];
    };
    std::vector<double> out(cols, 0.0);
    double dist = 0.0;
    for (std::size_t a : prob.active())
        for (std::size_t b = 0; b < cols; ++b)
            prob.for_terms(a, b, [&](double w, double d) {
                if (w <= 0.0) return;
                const double m = lambda * g(k1, q1, a1, a, b, d) + (1.0 - lambda) * g(k2, q2, a2, a, b, d);
                out[b] += p[a] * w * m;
                dist += p[a] * w * m * d;
            });
    double info = 0.0;
    for (std::size_t a : prob.active())
        for (std::size_t b = 0; b < cols; ++b)
            prob.for_terms(a, b, [&](double w, double d) {
                if (w <= 0.0) return;
                const double m = lambda * g(k1, q1, a1, a, b, d) + (1.0 - lambda) * g(k2, q2, a2, a, b, d);
                if (m > 0.0 && out[b] > 0.0) info += p[a] * w * m * std::log(m / out[b]);
            });
    return {std::max(info, 0.0), dist};
}

RDResult solve(const KernelProblem& prob, double target, const BlahutArimotoOptions& opt) {
    if (!(target >= 0.0) || !std::isfinite(target)) throw Error(ErrorCode::InvalidInput, "target distortion must be >= 0");
    if (!(opt.tolerance > 0.0)) throw Error(ErrorCode::InvalidInput, "tolerance must be positive");
    if (opt.block_length == 0) throw Error(ErrorCode::InvalidInput, "block length must be positive");
    const double n = static_cast<double>(opt.block_length);
    RDResult res;
    res.block_length = opt.block_length;

    const auto [dmax, best_b] = prob.d_max();
    if (target >= dmax) {
        res.rate = res.rate_lower = 0.0;
        res.achieved_distortion = dmax;
        res.converged = true;
        return res;
    }
    const double dmin = prob.d_min();
    const double slack = 1e-12 * std::max(1.0, dmin);
    if (target < dmin - slack)
        throw Error(ErrorCode::Infeasible, "target distortion is below the minimum achievable distortion");

    const std::vector<double> uniform(prob.cols(), 1.0 / static_cast<double>(prob.cols()));
    if (target <= dmin + slack) {
        auto q = uniform;
        const auto ker = build_kernel(prob, 0.0, true);
        const auto f = run_fixed_slope(prob, ker, q, opt.tolerance, opt.max_iterations);
        res.rate = f.rate / n;
        res.rate_lower = std::max(0.0, f.lower_base) / n;
        res.achieved_distortion = f.distortion;
        res.slope = -std::numeric_limits<double>::infinity();
        res.iterations = f.iterations;
        res.converged = f.converged;
        return res;
    }

    struct State {
        Kernel ker;
        std::vector<double> q;
        FixedSlope fit;
    };
    std::vector<double> q = uniform;
    std::size_t iterations = 0;
    double best_lower = 0.0;
    auto evaluate = [&](double s) {
        State st{build_kernel(prob, s, false), {}, {}};
        // Multiplicative updates cannot revive an output whose mass underflowed
        // at the previous slope, so keep every warm-start entry positive.
        for (std::size_t b = 0; b < q.size(); ++b) q[b] = (1.0 - 1e-6) * q[b] + 1e-6 * uniform[b];
        st.fit = run_fixed_slope(prob, st.ker, q, opt.tolerance, opt.max_iterations);
        st.q = q;
        iterations += st.fit.iterations;
        best_lower = std::max(best_lower, s * target + st.fit.lower_base);
        return st;
    };

    // Bracket the slope: lo is feasible (D <= target), hi is not.
    std::optional<State> lo, hi;
    double s = -1.0;
    for (int k = 0; k < 200; ++k) {
        auto st = evaluate(s);
        const bool feasible = st.fit.distortion <= target;
        if (feasible) lo = std::move(st);
        else hi = std::move(st);
        if (lo && hi) break;
        if (!lo) s *= 2.0;
        else s *= 0.5;
        if (std::abs(s) > 1e15 || std::abs(s) < 1e-15) break;
    }
    if (!lo) {
        // The target sits numerically on the minimum distortion.
        auto qm = uniform;
        const auto ker = build_kernel(prob, 0.0, true);
        auto f = run_fixed_slope(prob, ker, qm, opt.tolerance, opt.max_iterations);
        iterations += f.iterations;
        lo = State{ker, qm, std::move(f)};
    }

    auto gap = [&] { return lo->fit.rate - best_lower; };
    for (std::size_t k = 0; hi && k < opt.max_bisections && gap() > opt.tolerance; ++k) {
        const double mid = 0.5 * (lo->ker.slope + hi->ker.slope);
        if (mid == lo->ker.slope || mid == hi->ker.slope) break;
        auto st = evaluate(mid);
        if (st.fit.distortion <= target) lo = std::move(st);
        else hi = std::move(st);
    }

    double rate = lo->fit.rate;
    double achieved = lo->fit.distortion;
    if (hi && gap() > opt.tolerance && hi->fit.distortion > lo->fit.distortion) {
        // R is affine between the two endpoints of a jump in D(s); time sharing
        // attains the chord.
        double lambda = (hi->fit.distortion - target) / (hi->fit.distortion - lo->fit.distortion);
        for (int k = 0; k < 4; ++k) {
            const auto [info, dist] =
                time_shared(prob, lo->ker, lo->q, lo->fit.a, hi->ker, hi->q, hi->fit.a, lambda);
            if (dist <= target) {
                if (info < rate) rate = info, achieved = dist;
                break;
            }
            lambda = std::min(1.0, lambda + 1e-12 * std::pow(10.0, k));
        }
    }

    res.rate = rate / n;
    res.rate_lower = std::clamp(best_lower, 0.0, rate) / n;
    res.achieved_distortion = achieved;
    res.slope = lo->ker.slope;
    res.iterations = iterations;
    // Inner runs at bracketing slopes may stall without affecting the result;
    // only the final certificate decides.
    res.converged = (rate - best_lower) <= 10.0 * opt.tolerance;
    return res;
}

double log_binomial(std::size_t n, std::size_t k) {
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

RDResult blahut_arimoto(std::span<const double> source, const DistortionTable& distortion, double target,
                        const BlahutArimotoOptions& options) {
    const KernelProblem prob(std::vector<double>(source.begin(), source.end()), distortion);
    return solve(prob, target, options);
}

FixedSlopeTrace blahut_arimoto_fixed_slope(std::span<const double> source, const DistortionTable& distortion,
                                           double slope, std::size_t iterations) {
    if (slope > 0.0) throw Error(ErrorCode::InvalidInput, "slope must be <= 0");
    const KernelProblem prob(std::vector<double>(source.begin(), source.end()), distortion);
    const auto ker = build_kernel(prob, slope, false);
    std::vector<double> q(prob.cols(), 1.0 / static_cast<double>(prob.cols()));
    FixedSlopeTrace out;
    const auto f = run_fixed_slope(prob, ker, q, 0.0, iterations, &out.lagrangian);
    out.rate = f.rate;
    out.distortion = f.distortion;
    return out;
}

RDResult exchangeable_blahut_arimoto(std::span<const double> weight_law, std::size_t n,
                                     const std::function<double(std::size_t)>& distortion, double target,
                                     const BlahutArimotoOptions& options) {
    if (weight_law.size() != n + 1) throw Error(ErrorCode::LengthMismatch, "weight law must have n + 1 entries");
    const std::size_t classes = n + 1;
    std::vector<double> dist_of(n + 1);
    for (std::size_t t = 0; t <= n; ++t) dist_of[t] = distortion(t);
    std::vector<std::size_t> offsets{0};
    std::vector<double> weights, dists;
    for (std::size_t a = 0; a < classes; ++a)
        for (std::size_t b = 0; b < classes; ++b) {
            // Hypergeometric: outputs of weight b sharing c ones with a fixed input of weight a.
            const std::size_t c_lo = a + b > n ? a + b - n : 0;
            const std::size_t c_hi = std::min(a, b);
            for (std::size_t c = c_lo; c <= c_hi; ++c) {
                weights.push_back(
                    std::exp(log_binomial(a, c) + log_binomial(n - a, b - c) - log_binomial(n, b)));
                dists.push_back(dist_of[a + b - 2 * c]);
            }
            offsets.push_back(weights.size());
        }
    const KernelProblem prob(std::vector<double>(weight_law.begin(), weight_law.end()), classes, std::move(offsets),
                             std::move(weights), std::move(dists));
    return solve(prob, target, options);
}

// =============================================================================
// Rate-distortion functions of shift measures
// =============================================================================

namespace {

bool additive(const DistortionSpec& spec) {
    return spec.metric == MetricMode::SingleCoordinate && !std::holds_alternative<BowenMax>(spec.condition);
}

}  // namespace

bool exchangeable_eligible(const ShiftMeasure& measure, const DistortionSpec& spec) {
    const auto& sys = measure.system();
    return measure.is_exchangeable() && sys.is_full() && sys.alphabet().size() == 2 &&
           spec.metric == MetricMode::SingleCoordinate;
}

RDResult rate_distortion_function(const ShiftMeasure& measure, const DistortionSpec& spec,
                                  const RateDistortionOptions& options) {
    spec.validate();
    const std::size_t n = spec.block_length;
    auto ba = options.ba;
    ba.block_length = n;
    const double target = spec.target();

    bool use_classes = false;
    switch (options.path) {
        case SolverPath::Auto: use_classes = exchangeable_eligible(measure, spec); break;
        case SolverPath::Exchangeable:
            if (!exchangeable_eligible(measure, spec))
                throw Error(ErrorCode::InvalidInput,
                            "weight-class solver needs a binary full shift, an exchangeable measure and the "
                            "single-coordinate metric");
            use_classes = true;
            break;
        case SolverPath::Dense: break;
    }

    RDResult res;
    double block_entropy = 0.0;
    if (use_classes) {
        const auto law = weight_class_law(measure, n);
        const double unit = measure.system().alphabet().distance(0, 1);
        const DistortionSpec s1 = spec;
        auto dist = [&](std::size_t t) {
            const double nn = static_cast<double>(n);
            return std::visit(
                [&](const auto& c) -> double {
                    using T = std::decay_t<decltype(c)>;
                    if constexpr (std::is_same_v<T, LpAverage>) return static_cast<double>(t) * std::pow(unit, c.p) / nn;
                    else if constexpr (std::is_same_v<T, BowenMax>) return t > 0 ? unit : 0.0;
                    else return unit >= c.epsilon ? static_cast<double>(t) / nn : 0.0;
                },
                s1.condition);
        };
        res = exchangeable_blahut_arimoto(law, n, dist, target, ba);
        for (std::size_t a = 0; a <= n; ++a)
            if (law[a] > 0.0) block_entropy += law[a] * (log_binomial(n, a) - std::log(law[a]));
    } else if (spec.metric == MetricMode::WindowedProduct) {
        const auto br = rate_distortion_bracket(measure, spec, options);
        res = br.from_upper;
        res.rate_lower = std::min(br.from_lower.rate_lower, res.rate);
        res.converged = br.from_lower.converged && br.from_upper.converged;
        return res;
    } else {
        const auto bd = block_distortion(measure.system(), spec, options.cap);
        std::vector<double> source(bd.words.size());
        for (std::size_t i = 0; i < source.size(); ++i) source[i] = measure.cylinder_mass(bd.words[i]);
        res = blahut_arimoto(source, bd.lower, target, ba);
        block_entropy = shannon_entropy(source);
    }
    if (additive(spec)) {
        const double excess = block_entropy / static_cast<double>(n) - measure.entropy_rate();
        res.certified_lower = std::max(0.0, res.rate_lower - std::max(0.0, excess));
    }
    return res;
}

RDBracket rate_distortion_bracket(const ShiftMeasure& measure, const DistortionSpec& spec,
                                  const RateDistortionOptions& options) {
    spec.validate();
    auto ba = options.ba;
    ba.block_length = spec.block_length;
    const auto bd = block_distortion(measure.system(), spec, options.cap);
    std::vector<double> source(bd.words.size());
    for (std::size_t i = 0; i < source.size(); ++i) source[i] = measure.cylinder_mass(bd.words[i]);
    RDBracket out;
    out.from_lower = blahut_arimoto(source, bd.lower, spec.target(), ba);
    out.from_upper = blahut_arimoto(source, bd.upper, spec.target(), ba);
    return out;
}

// =============================================================================
// Rate-distortion entropies
// =============================================================================

const char* to_string(RDFamily family) noexcept {
    switch (family) {
        case RDFamily::Lp: return "lp";
        case RDFamily::LInf: return "linf";
        case RDFamily::Bowen: return "bowen";
        case RDFamily::RLimit: return "r";
    }
    return "?";
}

RDFamily rd_family_from_string(const std::string& name) {
    if (name == "lp" || name == "l1" || name == "l2") return RDFamily::Lp;
    if (name == "linf") return RDFamily::LInf;
    if (name == "bowen") return RDFamily::Bowen;
    if (name == "r" || name == "rlimit" || name == "mistake") return RDFamily::RLimit;
    throw Error(ErrorCode::Config, "unknown rate-distortion family '" + name + "'");
}

DistortionSpec make_spec(RDFamily family, double p, double epsilon, double fraction, std::size_t n,
                         MetricMode metric) {
    DistortionSpec spec;
    switch (family) {
        case RDFamily::Lp: spec.condition = LpAverage{p, epsilon}; break;
        case RDFamily::LInf: spec.condition = LInfIndicator{epsilon, fraction}; break;
        case RDFamily::Bowen: spec.condition = BowenMax{epsilon}; break;
        case RDFamily::RLimit: spec.condition = MistakeFraction{epsilon, fraction}; break;
    }
    spec.block_length = n;
    spec.metric = metric;
    return spec;
}

namespace {

void require_decreasing(const std::vector<double>& grid, const char* what, std::size_t min_points) {
    if (grid.size() < min_points)
        throw Error(ErrorCode::InvalidInput,
                    std::string(what) + " grid needs at least " + std::to_string(min_points) + " points");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] < grid[i - 1])) throw Error(ErrorCode::InvalidInput, std::string(what) + " grid must decrease");
}

}  // namespace

RDEntropy rd_entropy(const ShiftMeasure& measure, const RDEntropyRequest& request,
                     const RateDistortionOptions& options) {
    const bool two_axis = request.family == RDFamily::LInf || request.family == RDFamily::RLimit;
    require_decreasing(request.epsilons, "epsilon", two_axis ? 1 : 4);
    if (two_axis) require_decreasing(request.fractions, two_axis ? "fraction" : "", 4);
    if (request.block_lengths.empty()) throw Error(ErrorCode::InvalidInput, "block length list is empty");

    const std::vector<double> fractions = two_axis ? request.fractions : std::vector<double>{0.0};
    const std::size_t ne = request.epsilons.size(), nf = fractions.size(), nn = request.block_lengths.size();
    std::vector<RDResult> cells(ne * nf * nn);
    parallel_for(cells.size(), request.jobs, [&](std::size_t idx) {
        const std::size_t k = idx % nn, j = (idx / nn) % nf, i = idx / (nn * nf);
        const auto spec = make_spec(request.family, request.p, request.epsilons[i], fractions[j],
                                    request.block_lengths[k], request.metric);
        cells[idx] = rate_distortion_function(measure, spec, options);
    });

    RDEntropy out;
    out.trail.reserve(ne * nf);
    for (std::size_t i = 0; i < ne; ++i)
        for (std::size_t j = 0; j < nf; ++j) {
            RDGridPoint pt;
            pt.epsilon = request.epsilons[i];
            pt.fraction = fractions[j];
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < nn; ++k) {
                const auto& r = cells[(i * nf + j) * nn + k];
                if (r.rate < best) best = r.rate, pt.result = r, pt.best_block_length = request.block_lengths[k];
                pt.certified_lower = std::max(pt.certified_lower, r.certified_lower);
            }
            out.trail.push_back(pt);
        }

    // Finer epsilon (or fraction) never lowers the rate.
    auto at = [&](std::size_t i, std::size_t j) { return out.trail[i * nf + j].result.rate; };
    std::ostringstream why;
    for (std::size_t i = 0; i < ne; ++i)
        for (std::size_t j = 0; j < nf; ++j) {
            if (i > 0 && at(i, j) < at(i - 1, j) - request.monotonicity_tolerance)
                why << " eps " << request.epsilons[i - 1] << "->" << request.epsilons[i] << ": " << at(i - 1, j)
                    << " -> " << at(i, j) << ";";
            if (j > 0 && at(i, j) < at(i, j - 1) - request.monotonicity_tolerance)
                why << " fraction " << fractions[j - 1] << "->" << fractions[j] << ": " << at(i, j - 1) << " -> "
                    << at(i, j) << ";";
        }
    if (!why.str().empty()) throw Error(ErrorCode::MonotonicityViolation, "rate decreased as the grid refined:" + why.str());

    out.value = out.trail.back().result.rate;
    out.certified_lower = out.trail.back().certified_lower;
    out.monotone = true;
    return out;
}

}  // namespace erl

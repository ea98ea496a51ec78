#include "erl/mean_dimension.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "erl/error.hpp"
#include "erl/parallel.hpp"

namespace erl {

const char* to_string(ScalingCurve::ScaleKind kind) noexcept {
    return kind == ScalingCurve::ScaleKind::Epsilon ? "eps" : "m";
}

void ScalingCurve::validate() const {
    if (points.empty()) throw Error(ErrorCode::InvalidInput, "empty scaling curve");
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (!(p.lower <= p.upper + 1e-12))
            throw Error(ErrorCode::InvalidInput, "curve lower exceeds upper at scale " + std::to_string(p.scale));
        if (kind == ScaleKind::Epsilon) {
            if (!(p.scale > 0.0 && p.scale < 1.0))
                throw Error(ErrorCode::InvalidInput, "eps scales must lie in (0, 1)");
            if (i > 0 && !(p.scale < points[i - 1].scale))
                throw Error(ErrorCode::InvalidInput, "eps scales must be strictly decreasing");
        } else {
            if (!(p.scale > 1.0)) throw Error(ErrorCode::InvalidInput, "cell counts must exceed 1");
            if (i > 0 && !(p.scale > points[i - 1].scale))
                throw Error(ErrorCode::InvalidInput, "cell counts must be strictly increasing");
        }
    }
}

double ScalingCurve::log_resolution(std::size_t i) const {
    const double s = points.at(i).scale;
    return kind == ScaleKind::Epsilon ? -std::log(s) : std::log(s);
}

namespace {

struct Fit {
    double slope = 0.0;
    double residual = 0.0;
};

Fit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    Fit f;
    f.slope = sxy / sxx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (my + f.slope * (x[i] - mx));
        ss += r * r;
    }
    f.residual = std::sqrt(ss / n);
    return f;
}

void check_eps_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw Error(ErrorCode::InvalidInput, "empty eps grid");
    for (double e : grid)
        if (!(e > 0.0)) throw Error(ErrorCode::InvalidInput, "eps must be positive");
}

}  // namespace

DimensionEstimate dimension_fit(const ScalingCurve& curve) {
    curve.validate();
    const std::size_t k = curve.points.size();
    if (k < 2) throw Error(ErrorCode::InvalidInput, "a dimension fit needs at least two scales");
    const double span = curve.log_resolution(k - 1) - curve.log_resolution(0);
    if (span < 3.0 * std::log(2.0) - 1e-12)
        throw Error(ErrorCode::InvalidInput, "scale grid spans fewer than three doublings");

    DimensionEstimate d;
    d.curve = curve;
    std::vector<double> x(k), lo(k), up(k);
    for (std::size_t i = 0; i < k; ++i) {
        x[i] = curve.log_resolution(i);
        lo[i] = curve.points[i].lower;
        up[i] = curve.points[i].upper;
        d.ratio_lower.push_back(lo[i] / x[i]);
        d.ratio_upper.push_back(up[i] / x[i]);
    }
    const std::size_t tail = k / 2;  // finer half starts here
    const auto [umin, umax] = std::minmax_element(d.ratio_upper.begin() + tail, d.ratio_upper.end());
    const auto [lmin, lmax] = std::minmax_element(d.ratio_lower.begin() + tail, d.ratio_lower.end());
    d.lower = *umin;
    d.upper = *umax;
    d.floor_lower = *lmin;
    d.floor_upper = *lmax;
    d.endpoint_lower = d.ratio_lower.back();
    d.endpoint_upper = d.ratio_upper.back();
    const Fit fl = least_squares(x, lo), fu = least_squares(x, up);
    d.slope_lower = fl.slope;
    d.residual_lower = fl.residual;
    d.slope_upper = fu.slope;
    d.residual_upper = fu.residual;
    return d;
}

// -----------------------------------------------------------------------------
// Topological eps-entropy
// -----------------------------------------------------------------------------

std::size_t greedy_separated_count(const ShiftSystem& system, const WordList& words, double eps) {
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < words.size(); ++i) {
        const bool separated = std::all_of(chosen.begin(), chosen.end(), [&](std::size_t c) {
            return bowen_distance(system, words[i], words[c]).lower >= eps;
        });
        if (separated) chosen.push_back(i);
    }
    return chosen.size();
}

std::size_t greedy_spanning_count(const ShiftSystem& system, const WordList& words, double radius) {
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < words.size(); ++i) {
        const bool covered = std::any_of(chosen.begin(), chosen.end(), [&](std::size_t c) {
            return bowen_distance(system, words[i], words[c]).upper < radius;
        });
        if (!covered) chosen.push_back(i);
    }
    return chosen.size();
}

EntropyEstimate topological_eps_entropy(const ShiftSystem& system, double eps, const std::vector<std::size_t>& n_list,
                                        const TopologicalOptions& options) {
    if (!(eps > 0.0)) throw Error(ErrorCode::InvalidInput, "eps must be positive");
    if (n_list.empty()) throw Error(ErrorCode::InvalidInput, "empty n list");
    for (auto n : n_list)
        if (n == 0) throw Error(ErrorCode::InvalidInput, "block lengths must be positive");

    const bool discrete = discrete_regime(system, eps);
    EntropyEstimate est;
    est.kind = discrete ? EntropyEstimate::Kind::Exact : EntropyEstimate::Kind::Bracket;
    est.per_n.resize(n_list.size());
    parallel_for(n_list.size(), options.jobs, [&](std::size_t i) {
        const std::size_t n = n_list[i];
        auto& pt = est.per_n[i];
        pt.n = n;
        if (discrete) {
            pt.count_lower = pt.count_upper = system.word_count(n);
            pt.lower = pt.upper = system.log_word_count(n) / static_cast<double>(n);
            return;
        }
        const auto words = enumerate_words(system, n, options.cap);
        pt.count_lower = static_cast<double>(greedy_separated_count(system, words, eps));
        pt.count_upper = static_cast<double>(greedy_spanning_count(system, words, eps / 2));
        pt.lower = std::log(pt.count_lower) / static_cast<double>(n);
        pt.upper = std::log(pt.count_upper) / static_cast<double>(n);
    });
    est.lower = est.per_n.back().lower;
    est.upper = est.per_n.back().upper;
    est.n_used = est.per_n.back().n;
    est.note = discrete ? "admissible word count" : "greedy separated at eps, greedy spanning at eps/2";
    return est;
}

ScalingCurve topological_curve(const ShiftSystem& system, const std::vector<double>& eps_grid,
                               const std::vector<std::size_t>& n_list, const TopologicalOptions& options) {
    check_eps_grid(eps_grid);
    ScalingCurve curve;
    curve.points.resize(eps_grid.size());
    TopologicalOptions inner = options;
    inner.jobs = 1;
    parallel_for(eps_grid.size(), options.jobs, [&](std::size_t i) {
        const auto e = topological_eps_entropy(system, eps_grid[i], n_list, inner);
        curve.points[i] = {eps_grid[i], e.lower, e.upper};
    });
    return curve;
}

DimensionEstimate metric_mean_dimension(const ShiftSystem& system, const std::vector<double>& eps_grid,
                                        const std::vector<std::size_t>& n_list, const TopologicalOptions& options) {
    return dimension_fit(topological_curve(system, eps_grid, n_list, options));
}

DimensionEstimate metric_mean_dimension_cube(const std::vector<std::size_t>& m_grid,
                                             const std::vector<std::size_t>& n_list,
                                             const TopologicalOptions& options) {
    if (m_grid.empty()) throw Error(ErrorCode::InvalidInput, "empty m grid");
    ScalingCurve curve;
    curve.points.resize(m_grid.size());
    TopologicalOptions inner = options;
    inner.jobs = 1;
    parallel_for(m_grid.size(), options.jobs, [&](std::size_t i) {
        if (m_grid[i] < 2) throw Error(ErrorCode::InvalidInput, "cell counts must exceed 1");
        const double eps = 1.0 / static_cast<double>(m_grid[i]);
        const auto e = topological_eps_entropy(ShiftSystem::quantized_cube(m_grid[i]), eps, n_list, inner);
        curve.points[i] = {eps, e.lower, e.upper};
    });
    return dimension_fit(curve);
}

// -----------------------------------------------------------------------------
// MRID, IDR, rdim
// -----------------------------------------------------------------------------

namespace {

ScalePoint ks_point(const ShiftMeasure& measure, double eps, const KsOptions& ks) {
    const auto e = ks_eps_entropy(measure, eps, ks);
    return {eps, ks.rd_lower ? e.lower : 0.0, e.upper};
}

}  // namespace

DimensionEstimate mrid(const ShiftMeasure& measure, const std::vector<double>& eps_grid, const MridOptions& options) {
    check_eps_grid(eps_grid);
    ScalingCurve curve;
    curve.points.resize(eps_grid.size());
    parallel_for(eps_grid.size(), options.jobs,
                 [&](std::size_t i) { curve.points[i] = ks_point(measure, eps_grid[i], options.ks); });
    return dimension_fit(curve);
}

DimensionEstimate mrid(const CubeMeasure& measure, const std::vector<std::size_t>& m_grid, const MridOptions& options) {
    if (m_grid.empty()) throw Error(ErrorCode::InvalidInput, "empty m grid");
    ScalingCurve curve;
    curve.points.resize(m_grid.size());
    parallel_for(m_grid.size(), options.jobs, [&](std::size_t i) {
        if (m_grid[i] < 2) throw Error(ErrorCode::InvalidInput, "cell counts must exceed 1");
        curve.points[i] = ks_point(measure.quantize(m_grid[i]), 1.0 / static_cast<double>(m_grid[i]), options.ks);
    });
    return dimension_fit(curve);
}

DimensionEstimate information_dimension_rate(const CubeMeasure& measure, const std::vector<std::size_t>& m_grid,
                                             std::size_t jobs) {
    if (m_grid.empty()) throw Error(ErrorCode::InvalidInput, "empty m grid");
    ScalingCurve curve;
    curve.kind = ScalingCurve::ScaleKind::Cells;
    curve.points.resize(m_grid.size());
    parallel_for(m_grid.size(), jobs, [&](std::size_t i) {
        if (m_grid[i] < 2) throw Error(ErrorCode::InvalidInput, "cell counts must exceed 1");
        // alpha_m generates, so h_mu(sigma, alpha_m) is the entropy rate of the quantization.
        const double h = measure.quantize(m_grid[i]).entropy_rate();
        curve.points[i] = {static_cast<double>(m_grid[i]), h, h};
    });
    return dimension_fit(curve);
}

void information_dimension_rate(const ShiftMeasure& measure, const std::vector<std::size_t>&) {
    throw Error(ErrorCode::NotQuantizable,
                "measure lives on a fixed alphabet (" + measure.describe() + "); a cube measure is required");
}

DimensionEstimate rdim(const ShiftMeasure& measure, const std::vector<double>& eps_grid, const RdimRequest& request,
                       const RateDistortionOptions& options) {
    check_eps_grid(eps_grid);
    ScalingCurve curve;
    curve.points.resize(eps_grid.size());
    parallel_for(eps_grid.size(), request.jobs, [&](std::size_t i) {
        const auto spec =
            make_spec(request.family, request.p, eps_grid[i], request.fraction, request.block_length, request.metric);
        const auto r = rate_distortion_function(measure, spec, options);
        curve.points[i] = {eps_grid[i], std::min(r.certified_lower, r.rate), r.rate};
    });
    return dimension_fit(curve);
}

}  // namespace erl

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "erl/entropy.hpp"
#include "erl/measure.hpp"
#include "erl/rate_distortion.hpp"
#include "erl/system.hpp"

namespace erl {

// =============================================================================
// Scaling curves
// =============================================================================

struct ScalePoint {
    double scale = 0.0;  // eps, or the cell count m
    double lower = 0.0;  // nats per symbol
    double upper = 0.0;
};

struct ScalingCurve {
    enum class ScaleKind { Epsilon, Cells };
    ScaleKind kind = ScaleKind::Epsilon;
    std::vector<ScalePoint> points;

    // eps strictly decreasing and < 1, or m strictly increasing and > 1;
    // lower <= upper everywhere. Throws InvalidInput.
    void validate() const;
    // log(1/eps) or log m.
    double log_resolution(std::size_t i) const;
};

const char* to_string(ScalingCurve::ScaleKind kind) noexcept;

// Finite-grid rendering of liminf/limsup of value / log resolution. No limit
// is claimed; every number refers to the grid actually evaluated.
struct DimensionEstimate {
    ScalingCurve curve;
    std::vector<double> ratio_lower;  // curve lower / log resolution
    std::vector<double> ratio_upper;
    // min and max of ratio_upper over the finer half of the grid
    double lower = 0.0;
    double upper = 0.0;
    // same over ratio_lower: the bottom of the enclosure
    double floor_lower = 0.0;
    double floor_upper = 0.0;
    double endpoint_lower = 0.0;  // ratios at the finest scale
    double endpoint_upper = 0.0;
    // least-squares slope of value against log resolution, RMS residual
    double slope_lower = 0.0;
    double slope_upper = 0.0;
    double residual_lower = 0.0;
    double residual_upper = 0.0;
};

// Requires at least three doublings between the coarsest and finest scale.
DimensionEstimate dimension_fit(const ScalingCurve& curve);

// =============================================================================
// Topological eps-entropy
// =============================================================================

struct TopologicalOptions {
    std::size_t cap = kDefaultEnumerationCap;
    std::size_t jobs = 1;
};

// Greedy maximal set whose pairwise Bowen lower brackets are >= eps. It is
// eps-separated for every extension of the words.
std::size_t greedy_separated_count(const ShiftSystem& system, const WordList& words, double eps);

// Greedy set with every word within Bowen upper bracket < radius of a member.
// It is radius-spanning for every extension of the words.
std::size_t greedy_spanning_count(const ShiftSystem& system, const WordList& words, double radius);

// (1/n) log of the largest (d_n, eps)-separated set. Exact word count in the
// discrete regime; otherwise greedy separated at eps (lower) and greedy
// spanning at eps/2 (upper), since s(eps) <= r(eps/2).
EntropyEstimate topological_eps_entropy(const ShiftSystem& system, double eps,
                                        const std::vector<std::size_t>& n_list,
                                        const TopologicalOptions& options = {});

// Topological rate at the largest n of n_list over an eps grid.
ScalingCurve topological_curve(const ShiftSystem& system, const std::vector<double>& eps_grid,
                               const std::vector<std::size_t>& n_list, const TopologicalOptions& options = {});

DimensionEstimate metric_mean_dimension(const ShiftSystem& system, const std::vector<double>& eps_grid,
                                        const std::vector<std::size_t>& n_list,
                                        const TopologicalOptions& options = {});

// Quantized cube with m cells evaluated at eps = 1/m for each m of the grid.
DimensionEstimate metric_mean_dimension_cube(const std::vector<std::size_t>& m_grid,
                                             const std::vector<std::size_t>& n_list,
                                             const TopologicalOptions& options = {});

// =============================================================================
// MRID, information dimension rate, rate-distortion dimension
// =============================================================================

struct MridOptions {
    KsOptions ks = [] {
        KsOptions k;
        k.rd_lower = false;  // the rate-distortion floor is optional
        return k;
    }();
    std::size_t jobs = 1;
};

// ks_eps_entropy over the grid: upper values from the partition families,
// lower values from the rate-distortion floor when enabled.
DimensionEstimate mrid(const ShiftMeasure& measure, const std::vector<double>& eps_grid,
                       const MridOptions& options = {});

// Matched grid eps = 1/m on the quantizations of a cube measure.
DimensionEstimate mrid(const CubeMeasure& measure, const std::vector<std::size_t>& m_grid,
                       const MridOptions& options = {});

// h_mu(sigma, alpha_m) / log m over the grid.
DimensionEstimate information_dimension_rate(const CubeMeasure& measure, const std::vector<std::size_t>& m_grid,
                                             std::size_t jobs = 1);

// Fixed-alphabet measures cannot be requantized: always throws NotQuantizable.
[[noreturn]] void information_dimension_rate(const ShiftMeasure& measure, const std::vector<std::size_t>& m_grid);

struct RdimRequest {
    RDFamily family = RDFamily::Lp;
    double p = 1.0;
    double fraction = 0.0;  // s for LInf, r for RLimit
    std::size_t block_length = 1;
    MetricMode metric = MetricMode::SingleCoordinate;
    std::size_t jobs = 1;
};

// R(eps) / log(1/eps) over the grid; lower values are certified lower bounds
// (0 where none is available), upper values the achievable rates.
DimensionEstimate rdim(const ShiftMeasure& measure, const std::vector<double>& eps_grid, const RdimRequest& request,
                       const RateDistortionOptions& options = {});

}  // namespace erl

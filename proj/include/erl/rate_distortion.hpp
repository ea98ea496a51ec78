#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "erl/measure.hpp"
#include "erl/system.hpp"

namespace erl {

// =============================================================================
// Distortion conditions
// =============================================================================

// E[(1/n) sum_k d_k^p] < eps^p
struct LpAverage {
    double p = 1.0;
    double epsilon = 0.0;
};
// E[#{k : d_k >= eps}] < s n
struct LInfIndicator {
    double epsilon = 0.0;
    double s = 0.0;
};
// E[max_k d_k] < eps
struct BowenMax {
    double epsilon = 0.0;
};
// E[#{k : d_k < eps}] > (1 - r) n, the same constraint as LInfIndicator with s = r.
struct MistakeFraction {
    double epsilon = 0.0;
    double r = 0.0;
};

using DistortionCondition = std::variant<LpAverage, LInfIndicator, BowenMax, MistakeFraction>;

// How the per-shift distance d_k between source and reproduction is measured.
// SingleCoordinate: d(x_k, y_k). WindowedProduct: the windowed d^Z bracket of
// the k-th shifts of a common extension.
enum class MetricMode { SingleCoordinate, WindowedProduct };

// The solver targets threshold * (1 - kStrictnessMargin) so every converged
// result satisfies the strict inequality.
inline constexpr double kStrictnessMargin = 1e-6;

struct DistortionSpec {
    DistortionCondition condition;
    std::size_t block_length = 1;
    MetricMode metric = MetricMode::SingleCoordinate;

    void validate() const;
    double epsilon() const;
    // Right-hand side of the constraint on the expected block distortion.
    double threshold() const;
    double target() const { return threshold() * (1.0 - kStrictnessMargin); }
    std::string name() const;
};

// =============================================================================
// Block distortion tables
// =============================================================================

class DistortionTable {
public:
    DistortionTable() = default;
    DistortionTable(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double at(std::size_t x, std::size_t y) const noexcept { return values_[x * cols_ + y]; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

// Source and reproduction alphabets are both the admissible n-words. With the
// single-coordinate metric lower == upper.
struct BlockDistortion {
    WordList words;
    DistortionTable lower;
    DistortionTable upper;
};

// Distortion of one (source, reproduction) pair; `upper` selects the upper end
// of the windowed bracket.
double pair_distortion(const ShiftSystem& system, const DistortionSpec& spec, std::span<const Symbol> x,
                       std::span<const Symbol> y, bool upper = false);

BlockDistortion block_distortion(const ShiftSystem& system, const DistortionSpec& spec,
                                 std::size_t cap = kDefaultEnumerationCap);

// =============================================================================
// Blahut-Arimoto
// =============================================================================

struct BlahutArimotoOptions {
    double tolerance = 1e-9;             // dual gap, nats per block
    std::size_t max_iterations = 100000;  // per fixed slope
    std::size_t max_bisections = 200;
    std::size_t block_length = 1;         // rates are divided by this
};

struct RDResult {
    double rate = 0.0;                 // nats per symbol; achievable, so >= R(D)
    double rate_lower = 0.0;           // dual lower bound on the same block problem
    double certified_lower = 0.0;      // lower bound on inf over n (see rate_distortion_function)
    double achieved_distortion = 0.0;  // <= target whenever converged
    double slope = 0.0;                // beta <= 0
    std::size_t iterations = 0;
    bool converged = false;
    std::size_t block_length = 1;
};

// min I(X;Y)/n subject to E[d(X,Y)] <= target, over channels from the source
// alphabet to the table's columns.
RDResult blahut_arimoto(std::span<const double> source, const DistortionTable& distortion, double target,
                        const BlahutArimotoOptions& options = {});

// Fixed-slope run used to inspect convergence: the Lagrangian
// -sum_x p(x) log A(x) after every iteration.
struct FixedSlopeTrace {
    double rate = 0.0;
    double distortion = 0.0;
    std::vector<double> lagrangian;
};
FixedSlopeTrace blahut_arimoto_fixed_slope(std::span<const double> source, const DistortionTable& distortion,
                                           double slope, std::size_t iterations);

// Exact weight-class reduction for binary exchangeable sources. `weight_law[a]`
// is the total mass of n-words with a ones; `distortion(t)` is the block
// distortion of a pair with t mismatches. Iterates are those of dense BA from a
// uniform start.
RDResult exchangeable_blahut_arimoto(std::span<const double> weight_law, std::size_t n,
                                     const std::function<double(std::size_t)>& distortion, double target,
                                     const BlahutArimotoOptions& options = {});

// =============================================================================
// Rate-distortion functions of shift measures
// =============================================================================

enum class SolverPath { Auto, Dense, Exchangeable };

struct RateDistortionOptions {
    BlahutArimotoOptions ba;
    SolverPath path = SolverPath::Auto;
    std::size_t cap = kDefaultEnumerationCap;
};

bool exchangeable_eligible(const ShiftMeasure& measure, const DistortionSpec& spec);

// Block-n value with source law = n-block cylinder masses. certified_lower is
// rate_lower - (H_n/n - h), a lower bound on the infimum over all n.
RDResult rate_distortion_function(const ShiftMeasure& measure, const DistortionSpec& spec,
                                  const RateDistortionOptions& options = {});

// Windowed-product metric: rates from the lower and the upper distortion tables.
struct RDBracket {
    RDResult from_lower;
    RDResult from_upper;
};
RDBracket rate_distortion_bracket(const ShiftMeasure& measure, const DistortionSpec& spec,
                                  const RateDistortionOptions& options = {});

// =============================================================================
// Rate-distortion entropies
// =============================================================================

enum class RDFamily { Lp, LInf, Bowen, RLimit };
const char* to_string(RDFamily family) noexcept;
RDFamily rd_family_from_string(const std::string& name);

struct RDEntropyRequest {
    RDFamily family = RDFamily::Lp;
    double p = 1.0;
    std::vector<double> epsilons;       // strictly decreasing
    std::vector<double> fractions;      // s or r, strictly decreasing (LInf / RLimit)
    std::vector<std::size_t> block_lengths{1};
    MetricMode metric = MetricMode::SingleCoordinate;
    double monotonicity_tolerance = 1e-6;
    std::size_t jobs = 1;
};

struct RDGridPoint {
    double epsilon = 0.0;
    double fraction = 0.0;
    std::size_t best_block_length = 1;
    RDResult result;  // the block length attaining the minimum
    double certified_lower = 0.0;
};

struct RDEntropy {
    double value = 0.0;            // finest grid point, min over block lengths
    double certified_lower = 0.0;  // finest grid point
    std::vector<RDGridPoint> trail;
    bool monotone = true;
};

DistortionSpec make_spec(RDFamily family, double p, double epsilon, double fraction, std::size_t n,
                         MetricMode metric = MetricMode::SingleCoordinate);

// Evaluates the family on the grid and returns the finest point with a
// monotonicity certificate; throws MonotonicityViolation otherwise.
RDEntropy rd_entropy(const ShiftMeasure& measure, const RDEntropyRequest& request,
                     const RateDistortionOptions& options = {});

}  // namespace erl

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "erl/measure.hpp"
#include "erl/rate_distortion.hpp"
#include "erl/system.hpp"

namespace erl {

// =============================================================================
// Partitions and estimates
// =============================================================================

// The partition of X by coordinates -N..N over a base partition of the
// alphabet. With the alphabet partition every atom fixes 2N+1 symbols, so
// its d^Z diameter is at most cell_diameter (3 - 2^{1-N}) + 2^{1-N} diam.
struct PartitionFamily {
    std::size_t base_cells = 1;
    std::size_t window = 0;
    double cell_diameter = 0.0;
    double diameter_bound = 0.0;
    bool trivial = false;  // the one-atom partition {X}, diameter 3 diam

    static PartitionFamily alphabet(const ShiftSystem& system, std::size_t window);
    static PartitionFamily whole_space(const ShiftSystem& system);
    // Smallest window whose alphabet-partition diameter is <= eps, if any
    // within max_window.
    static std::optional<PartitionFamily> finest_fit(const ShiftSystem& system, double eps,
                                                     std::size_t max_window = 60);
    std::string describe() const;
};

struct EstimatePoint {
    std::size_t n = 0;
    double lower = 0.0;
    double upper = 0.0;
    double count_lower = 0.0;
    double count_upper = 0.0;
};

struct EntropyEstimate {
    enum class Kind { Exact, Upper, Lower, Bracket };
    Kind kind = Kind::Exact;
    double lower = 0.0;
    double upper = 0.0;
    std::size_t n_used = 0;
    double delta_used = 0.0;
    std::size_t samples_used = 0;
    std::vector<EstimatePoint> per_n;
    std::string note;

    double value() const { return kind == Kind::Lower ? lower : upper; }
};

const char* to_string(EntropyEstimate::Kind kind) noexcept;

// =============================================================================
// Estimators
// =============================================================================

// H_mu of the n-th refinement of the family: the entropy of the cylinders of
// length n + 2N. Closed forms for Bernoulli and Markov, weight classes for
// binary exchangeable mixtures, enumeration otherwise.
double block_entropy(const ShiftMeasure& measure, const PartitionFamily& family, std::size_t n,
                     std::size_t cap = kDefaultEnumerationCap);

struct KsOptions {
    bool rd_lower = true;           // compute the rate-distortion lower end
    std::size_t rd_block_length = 1;
    std::size_t max_window = 60;
    RateDistortionOptions rd;
};

// Bracket on inf over partitions of diameter <= eps of h_mu(T, alpha).
// upper: the best fitting family. lower: certified lower bound on the
// single-coordinate L^1 rate-distortion function at 2 eps, which sits below
// the d^Z one.
EntropyEstimate ks_eps_entropy(const ShiftMeasure& measure, double eps, const KsOptions& options = {});

// Word-level model: distinct n-words are at Bowen distance >= min_distance.
bool discrete_regime(const ShiftSystem& system, double eps);

struct CoverOptions {
    std::size_t cap = kDefaultEnumerationCap;
    std::size_t jobs = 1;
};

// Minimal number of Bowen eps-balls covering mass > 1 - delta, as a rate per n.
EntropyEstimate katok_eps_entropy(const ShiftMeasure& measure, double eps, double delta,
                                  const std::vector<std::size_t>& n_list, const CoverOptions& options = {});

// Minimal subfamily of the n-cylinder cover over alphabet groups of diameter
// at most (eps - tail) / 3 with mass > 1 - delta.
EntropyEstimate shapira_count(const ShiftMeasure& measure, double eps, double delta, std::size_t n,
                              const CoverOptions& options = {});

// Sample mean of -(1/n) log mu(B_n(x, eps)) over orbits drawn with seeds
// seed, seed + 1, ...
EntropyEstimate brin_katok_local(const ShiftMeasure& measure, double eps, std::size_t n, std::size_t samples,
                                 std::uint64_t seed, const CoverOptions& options = {});

enum class NeighborhoodKind { SymbolFrequencies, PairFrequencies };

// (1/n) log #{n-words whose empirical frequencies are within eta of the
// measure's}. Symbol boxes count compositions; pair boxes enumerate words.
EntropyEstimate pfister_sullivan(const ShiftMeasure& measure, double eps, double eta, std::size_t n,
                                 NeighborhoodKind kind = NeighborhoodKind::SymbolFrequencies,
                                 std::size_t cap = kDefaultEnumerationCap);

}  // namespace erl

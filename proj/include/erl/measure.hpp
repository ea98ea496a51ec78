#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "erl/system.hpp"

namespace erl {

// =============================================================================
// Shift-invariant measures with exact cylinder masses
// =============================================================================

// Bernoulli and Markov measures on a ShiftSystem, plus finite convex mixtures
// of them (the non-ergodic family). Immutable after construction.
class ShiftMeasure {
public:
    enum class Kind { Bernoulli, Markov, Mixture };

    static ShiftMeasure bernoulli(std::shared_ptr<const ShiftSystem> system, std::vector<double> p);
    // `transition` is row-major k x k and row-stochastic; the stationary law is
    // derived, never supplied.
    static ShiftMeasure markov(std::shared_ptr<const ShiftSystem> system, std::vector<double> transition);
    static ShiftMeasure mixture(std::vector<double> weights, std::vector<ShiftMeasure> components);

    Kind kind() const noexcept { return kind_; }
    const ShiftSystem& system() const noexcept { return *system_; }
    const std::shared_ptr<const ShiftSystem>& system_ptr() const noexcept { return system_; }
    std::size_t alphabet_size() const noexcept { return system_->alphabet().size(); }

    // Bernoulli: p. Markov: transition (row-major) and stationary.
    const std::vector<double>& probabilities() const noexcept { return probabilities_; }
    const std::vector<double>& transition() const noexcept { return transition_; }
    const std::vector<double>& stationary() const noexcept { return probabilities_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::vector<ShiftMeasure>& components() const noexcept { return components_; }

    // One-symbol marginal law.
    std::vector<double> marginal() const;

    double cylinder_mass(std::span<const Symbol> word) const;
    // log of the same mass; safe for long words.
    double log_cylinder_mass(std::span<const Symbol> word) const;
    // Kolmogorov-Sinai entropy in nats per symbol (closed form).
    double entropy_rate() const;
    // Draw an n-word from the n-block law. Same seed, same word.
    Word sample_orbit(std::size_t n, std::uint64_t seed) const;

    // Bernoulli, or a mixture whose components are all Bernoulli.
    bool is_exchangeable() const noexcept;
    std::string describe() const;

private:
    ShiftMeasure() = default;

    Kind kind_ = Kind::Bernoulli;
    std::shared_ptr<const ShiftSystem> system_;
    std::vector<double> probabilities_;
    std::vector<double> transition_;
    std::vector<double> weights_;
    std::vector<ShiftMeasure> components_;
};

// Binary exchangeable measures: entry a is the total mass of the n-words with
// a ones. Throws InvalidInput for anything else.
std::vector<double> weight_class_law(const ShiftMeasure& measure, std::size_t n);

// Stationary law of a row-stochastic matrix by a direct linear solve,
// validated against lazy power iteration.
std::vector<double> stationary_distribution(std::span<const double> transition, std::size_t k);

// =============================================================================
// Quantizable measures on the Hilbert cube [0,1]^Z
// =============================================================================

// Marginal law on [0,1]: Lebesgue with weight `lebesgue`, plus point masses.
struct CubeMarginal {
    double lebesgue = 0.0;
    std::vector<std::pair<double, double>> atoms;  // (value, mass)
};

// Finite mixture of product measures on [0,1]^Z. quantize(m) gives the
// measure the partition alpha_m induces on the m-point quantized cube.
class CubeMeasure {
public:
    CubeMeasure(std::vector<double> weights, std::vector<CubeMarginal> components);

    static CubeMeasure lebesgue();
    static CubeMeasure atoms(std::vector<std::pair<double, double>> atoms);
    static CubeMeasure point_mass(double value);

    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::vector<CubeMarginal>& components() const noexcept { return components_; }

    // Mass of [i/m, (i+1)/m) for i = 0..m-1 (the value 1 is folded into the last cell).
    std::vector<double> cell_masses(std::size_t component, std::size_t m) const;
    ShiftMeasure quantize(std::size_t m, int window = kDefaultWindow) const;
    std::string describe() const;

private:
    std::vector<double> weights_;
    std::vector<CubeMarginal> components_;
};

// =============================================================================
// JSON
// =============================================================================

// {"kind": "bernoulli", "p": [...]} | {"kind": "markov", "P": [[...]]} |
// {"kind": "mixture", "weights": [...], "components": [...]}
ShiftMeasure measure_from_json(const nlohmann::json& j, std::shared_ptr<const ShiftSystem> system);
nlohmann::json measure_to_json(const ShiftMeasure& measure);
bool is_cube_measure_json(const nlohmann::json& j);
// {"kind": "cube", "components": [{"weight": w, "lebesgue": l, "atoms": [[v, m], ...]}]}
CubeMeasure cube_measure_from_json(const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

}  // namespace erl

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace erl {

using Symbol = std::uint16_t;
using Word = std::vector<Symbol>;

inline constexpr std::size_t kDefaultEnumerationCap = std::size_t{1} << 24;
inline constexpr int kDefaultWindow = 20;

// =============================================================================
// Alphabet
// =============================================================================

// Finite metric space of symbols. The distance table is validated once at
// construction (symmetry, zero diagonal, triangle inequality) and is immutable
// afterwards.
class Alphabet {
public:
    Alphabet(std::vector<std::string> labels, std::vector<double> table);

    // k symbols at pairwise distance 1.
    static Alphabet discrete(std::size_t k);
    // m points i/m, i = 0..m-1, with |x - y|. Stand-in for the m-cell
    // quantization of [0,1].
    static Alphabet quantized_interval(std::size_t m);
    // Euclidean distance between coordinate vectors.
    static Alphabet from_coordinates(std::vector<std::string> labels,
                                     const std::vector<std::vector<double>>& coords);

    std::size_t size() const noexcept { return labels_.size(); }
    double distance(Symbol a, Symbol b) const noexcept { return table_[a * size() + b]; }
    double min_distance() const noexcept { return min_distance_; }
    double diameter() const noexcept { return diameter_; }
    const std::string& label(Symbol a) const { return labels_.at(a); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    // Every nonzero distance is the same value.
    bool is_uniform_metric() const noexcept { return uniform_; }

    // Cell count m when built by quantized_interval, nullopt otherwise.
    std::optional<std::size_t> quantization() const noexcept { return quantization_; }

private:
    std::vector<std::string> labels_;
    std::vector<double> table_;
    double min_distance_ = 0.0;
    double diameter_ = 0.0;
    bool uniform_ = true;
    std::optional<std::size_t> quantization_;
};

// =============================================================================
// Shift system
// =============================================================================

class TransitionTable {
public:
    TransitionTable(std::size_t k, std::vector<std::uint8_t> allowed);

    std::size_t size() const noexcept { return k_; }
    bool allowed(Symbol a, Symbol b) const noexcept { return allowed_[a * k_ + b] != 0; }
    bool irreducible() const;

private:
    std::size_t k_;
    std::vector<std::uint8_t> allowed_;
};

// X = A^Z (or an irreducible SFT inside it) with the left shift. `window`
// truncates the bi-infinite product metric d^Z(x,y) = sum_i d(x_i,y_i)/2^|i|.
class ShiftSystem {
public:
    explicit ShiftSystem(Alphabet alphabet, int window = kDefaultWindow);
    ShiftSystem(Alphabet alphabet, TransitionTable transitions, int window = kDefaultWindow);

    static ShiftSystem full(std::size_t k, int window = kDefaultWindow);
    static ShiftSystem golden_mean(int window = kDefaultWindow);
    static ShiftSystem quantized_cube(std::size_t m, int window = kDefaultWindow);

    const Alphabet& alphabet() const noexcept { return alphabet_; }
    const std::optional<TransitionTable>& transitions() const noexcept { return transitions_; }
    int window() const noexcept { return window_; }
    bool is_full() const noexcept { return !transitions_.has_value(); }

    bool admissible(Symbol a, Symbol b) const noexcept {
        return !transitions_ || transitions_->allowed(a, b);
    }
    bool is_admissible(std::span<const Symbol> word) const noexcept;

    // Number of admissible n-words, computed with the transfer matrix.
    double word_count(std::size_t n) const;
    double log_word_count(std::size_t n) const;

    // Upper bound on the d^Z mass carried by coordinates beyond the window,
    // 4 * diam * 2^-W.
    double tail_bound() const noexcept;

private:
    Alphabet alphabet_;
    std::optional<TransitionTable> transitions_;
    int window_;
};

// =============================================================================
// Words and distances
// =============================================================================

// Flat storage for a list of equal-length words.
class WordList {
public:
    WordList() = default;
    explicit WordList(std::size_t length) : length_(length) {}

    std::size_t length() const noexcept { return length_; }
    std::size_t size() const noexcept { return length_ == 0 ? 0 : data_.size() / length_; }
    std::span<const Symbol> operator[](std::size_t i) const {
        return {data_.data() + i * length_, length_};
    }
    void push_back(std::span<const Symbol> w);
    void reserve(std::size_t words) { data_.reserve(words * length_); }

private:
    std::size_t length_ = 0;
    std::vector<Symbol> data_;
};

// All admissible n-words, lexicographic in symbol index.
WordList enumerate_words(const ShiftSystem& system, std::size_t n,
                         std::size_t cap = kDefaultEnumerationCap);

struct DistanceBracket {
    double lower = 0.0;
    double upper = 0.0;
};

// d^Z(sigma^shift x~, sigma^shift y~) where x~, y~ are a common bi-infinite
// extension of the two words (they agree outside [0, n)).
DistanceBracket shifted_product_distance(const ShiftSystem& system, std::span<const Symbol> x,
                                         std::span<const Symbol> y, std::size_t shift);

// n-th Bowen metric: max over shifts j < n of the shifted product distance.
DistanceBracket bowen_distance(const ShiftSystem& system, std::span<const Symbol> x,
                               std::span<const Symbol> y);

// n-th mean metric with the single-coordinate alphabet metric.
double mean_distance(const Alphabet& alphabet, std::span<const Symbol> x,
                     std::span<const Symbol> y);

// Max over coordinates of the single-coordinate alphabet metric.
double coordinate_max_distance(const Alphabet& alphabet, std::span<const Symbol> x,
                               std::span<const Symbol> y);

// =============================================================================
// JSON
// =============================================================================

ShiftSystem system_from_json(const nlohmann::json& j);
nlohmann::json system_to_json(const ShiftSystem& system);
ShiftSystem load_system(const std::string& path);

}  // namespace erl

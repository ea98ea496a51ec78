#include "erl/system.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "erl/error.hpp"

namespace erl {

namespace {

constexpr double kMetricTolerance = 1e-12;

std::vector<std::string> numbered_labels(std::size_t k) {
    std::vector<std::string> labels(k);
    for (std::size_t i = 0; i < k; ++i) labels[i] = std::to_string(i);
    return labels;
}

}  // namespace

// -----------------------------------------------------------------------------
// Alphabet
// -----------------------------------------------------------------------------

Alphabet::Alphabet(std::vector<std::string> labels, std::vector<double> table)
    : labels_(std::move(labels)), table_(std::move(table)) {
    const std::size_t k = labels_.size();
    if (k == 0) throw Error(ErrorCode::InvalidInput, "alphabet must have at least one point");
    if (k > std::numeric_limits<Symbol>::max())
        throw Error(ErrorCode::InvalidInput, "alphabet too large");
    if (table_.size() != k * k)
        throw Error(ErrorCode::InvalidInput, "distance table must be k x k");

    min_distance_ = std::numeric_limits<double>::infinity();
    double first_nonzero = -1.0;
    for (std::size_t a = 0; a < k; ++a) {
        if (table_[a * k + a] != 0.0)
            throw Error(ErrorCode::InvalidInput, "distance table must have zero diagonal");
        for (std::size_t b = 0; b < k; ++b) {
            const double d = table_[a * k + b];
            if (!std::isfinite(d) || d < 0.0)
                throw Error(ErrorCode::InvalidInput, "distances must be finite and nonnegative");
            if (std::abs(d - table_[b * k + a]) > kMetricTolerance)
                throw Error(ErrorCode::InvalidInput, "distance table must be symmetric");
            if (a != b) {
                if (d <= 0.0)
                    throw Error(ErrorCode::InvalidInput, "distinct points must have positive distance");
                min_distance_ = std::min(min_distance_, d);
                if (first_nonzero < 0.0) first_nonzero = d;
                if (std::abs(d - first_nonzero) > kMetricTolerance) uniform_ = false;
            }
            diameter_ = std::max(diameter_, d);
        }
    }
    // Exhaustive triangle check, O(k^3).
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b)
            for (std::size_t c = 0; c < k; ++c)
                if (table_[a * k + c] > table_[a * k + b] + table_[b * k + c] + kMetricTolerance)
                    throw Error(ErrorCode::InvalidInput, "distance table violates the triangle inequality");
    if (k == 1) min_distance_ = 0.0;
}

Alphabet Alphabet::discrete(std::size_t k) {
    std::vector<double> table(k * k, 1.0);
    for (std::size_t a = 0; a < k; ++a) table[a * k + a] = 0.0;
    return Alphabet(numbered_labels(k), std::move(table));
}

Alphabet Alphabet::quantized_interval(std::size_t m) {
    if (m == 0) throw Error(ErrorCode::InvalidInput, "quantization needs m >= 1");
    std::vector<double> table(m * m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
            table[a * m + b] = std::abs(static_cast<double>(a) - static_cast<double>(b)) /
                               static_cast<double>(m);
    // Skip the O(m^3) triangle scan: |.| on a line is a metric.
    Alphabet out(numbered_labels(1), {0.0});
    out.labels_ = numbered_labels(m);
    out.table_ = std::move(table);
    out.min_distance_ = m > 1 ? 1.0 / static_cast<double>(m) : 0.0;
    out.diameter_ = m > 1 ? static_cast<double>(m - 1) / static_cast<double>(m) : 0.0;
    out.uniform_ = m <= 2;
    out.quantization_ = m;
    return out;
}

Alphabet Alphabet::from_coordinates(std::vector<std::string> labels,
                                    const std::vector<std::vector<double>>& coords) {
    const std::size_t k = coords.size();
    if (labels.size() != k) throw Error(ErrorCode::InvalidInput, "labels and coordinates differ in length");
    std::vector<double> table(k * k, 0.0);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) {
            if (coords[a].size() != coords[b].size())
                throw Error(ErrorCode::InvalidInput, "coordinate dimensions differ");
            double s = 0.0;
            for (std::size_t i = 0; i < coords[a].size(); ++i) {
                const double diff = coords[a][i] - coords[b][i];
                s += diff * diff;
            }
            table[a * k + b] = std::sqrt(s);
        }
    return Alphabet(std::move(labels), std::move(table));
}

// -----------------------------------------------------------------------------
// Transitions and systems
// -----------------------------------------------------------------------------

TransitionTable::TransitionTable(std::size_t k, std::vector<std::uint8_t> allowed)
    : k_(k), allowed_(std::move(allowed)) {
    if (allowed_.size() != k * k) throw Error(ErrorCode::InvalidInput, "transition table must be k x k");
    for (auto& v : allowed_) {
        if (v > 1) throw Error(ErrorCode::InvalidInput, "transition entries must be 0 or 1");
    }
}

bool TransitionTable::irreducible() const {
    for (std::size_t start = 0; start < k_; ++start) {
        std::vector<bool> seen(k_, false);
        std::vector<std::size_t> stack{start};
        while (!stack.empty()) {
            const std::size_t a = stack.back();
            stack.pop_back();
            for (std::size_t b = 0; b < k_; ++b) {
                if (allowed_[a * k_ + b] && !seen[b]) {
                    seen[b] = true;
                    stack.push_back(b);
                }
            }
        }
        if (!std::all_of(seen.begin(), seen.end(), [](bool s) { return s; })) return false;
    }
    return true;
}

ShiftSystem::ShiftSystem(Alphabet alphabet, int window)
    : alphabet_(std::move(alphabet)), window_(window) {
    if (window_ < 0) throw Error(ErrorCode::InvalidInput, "window must be nonnegative");
}

ShiftSystem::ShiftSystem(Alphabet alphabet, TransitionTable transitions, int window)
    : alphabet_(std::move(alphabet)), transitions_(std::move(transitions)), window_(window) {
    if (window_ < 0) throw Error(ErrorCode::InvalidInput, "window must be nonnegative");
    if (transitions_->size() != alphabet_.size())
        throw Error(ErrorCode::InvalidInput, "transition table size must match the alphabet");
    if (!transitions_->irreducible())
        throw Error(ErrorCode::InvalidInput, "transition table is reducible");
}

ShiftSystem ShiftSystem::full(std::size_t k, int window) {
    return ShiftSystem(Alphabet::discrete(k), window);
}

ShiftSystem ShiftSystem::golden_mean(int window) {
    return ShiftSystem(Alphabet::discrete(2), TransitionTable(2, {1, 1, 1, 0}), window);
}

ShiftSystem ShiftSystem::quantized_cube(std::size_t m, int window) {
    return ShiftSystem(Alphabet::quantized_interval(m), window);
}

bool ShiftSystem::is_admissible(std::span<const Symbol> word) const noexcept {
    for (Symbol s : word)
        if (s >= alphabet_.size()) return false;
    for (std::size_t i = 1; i < word.size(); ++i)
        if (!admissible(word[i - 1], word[i])) return false;
    return true;
}

double ShiftSystem::log_word_count(std::size_t n) const {
    if (n == 0) return 0.0;
    const std::size_t k = alphabet_.size();
    if (is_full()) return static_cast<double>(n) * std::log(static_cast<double>(k));
    // v_b = number of admissible words ending in b, renormalized each step.
    std::vector<double> v(k, 1.0), next(k);
    double log_scale = 0.0;
    for (std::size_t step = 1; step < n; ++step) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b)
                if (transitions_->allowed(static_cast<Symbol>(a), static_cast<Symbol>(b))) next[b] += v[a];
        const double mx = *std::max_element(next.begin(), next.end());
        for (std::size_t b = 0; b < k; ++b) v[b] = next[b] / mx;
        log_scale += std::log(mx);
    }
    return log_scale + std::log(std::accumulate(v.begin(), v.end(), 0.0));
}

double ShiftSystem::word_count(std::size_t n) const {
    return std::round(std::exp(log_word_count(n)));
}

double ShiftSystem::tail_bound() const noexcept {
    return 4.0 * alphabet_.diameter() * std::ldexp(1.0, -window_);
}

// -----------------------------------------------------------------------------
// Words
// -----------------------------------------------------------------------------

void WordList::push_back(std::span<const Symbol> w) {
    if (w.size() != length_) throw Error(ErrorCode::LengthMismatch, "word length differs from list length");
    data_.insert(data_.end(), w.begin(), w.end());
}

WordList enumerate_words(const ShiftSystem& system, std::size_t n, std::size_t cap) {
    if (n == 0) throw Error(ErrorCode::InvalidInput, "word length must be positive");
    const std::size_t k = system.alphabet().size();
    const double total = std::pow(static_cast<double>(k), static_cast<double>(n));
    if (total > static_cast<double>(cap))
        throw Error(ErrorCode::CapExceeded,
                    std::to_string(k) + "^" + std::to_string(n) + " words exceed the enumeration cap");

    WordList out(n);
    out.reserve(static_cast<std::size_t>(std::exp(system.log_word_count(n))) + 1);
    Word w(n, 0);
    // Depth-first odometer over admissible extensions keeps lexicographic order.
    std::size_t depth = 0;
    std::vector<std::size_t> next(n, 0);
    while (true) {
        if (next[depth] >= k) {
            if (depth == 0) break;
            --depth;
            continue;
        }
        const auto s = static_cast<Symbol>(next[depth]++);
        if (depth > 0 && !system.admissible(w[depth - 1], s)) continue;
        w[depth] = s;
        if (depth + 1 == n) {
            out.push_back(w);
        } else {
            ++depth;
            next[depth] = 0;
        }
    }
    return out;
}

DistanceBracket shifted_product_distance(const ShiftSystem& system, std::span<const Symbol> x,
                                         std::span<const Symbol> y, std::size_t shift) {
    if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "words differ in length");
    const auto& alphabet = system.alphabet();
    const auto n = static_cast<long>(x.size());
    const long w = system.window();
    const long j = static_cast<long>(shift);
    double sum = 0.0;
    const long lo = std::max(-w, -j);
    const long hi = std::min(w, n - 1 - j);
    for (long i = lo; i <= hi; ++i) {
        const auto pos = static_cast<std::size_t>(j + i);
        sum += std::ldexp(alphabet.distance(x[pos], y[pos]), -static_cast<int>(std::abs(i)));
    }
    return {sum, sum + system.tail_bound()};
}

DistanceBracket bowen_distance(const ShiftSystem& system, std::span<const Symbol> x,
                               std::span<const Symbol> y) {
    if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "words differ in length");
    DistanceBracket best{0.0, system.tail_bound()};
    for (std::size_t j = 0; j < x.size(); ++j) {
        const auto d = shifted_product_distance(system, x, y, j);
        best.lower = std::max(best.lower, d.lower);
        best.upper = std::max(best.upper, d.upper);
    }
    return best;
}

double mean_distance(const Alphabet& alphabet, std::span<const Symbol> x, std::span<const Symbol> y) {
    if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "words differ in length");
    if (x.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += alphabet.distance(x[i], y[i]);
    return sum / static_cast<double>(x.size());
}

double coordinate_max_distance(const Alphabet& alphabet, std::span<const Symbol> x,
                               std::span<const Symbol> y) {
    if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "words differ in length");
    double best = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) best = std::max(best, alphabet.distance(x[i], y[i]));
    return best;
}

// -----------------------------------------------------------------------------
// JSON
// -----------------------------------------------------------------------------

namespace {

Alphabet alphabet_from_json(const nlohmann::json& j) {
    if (j.contains("kind")) {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "discrete") return Alphabet::discrete(j.at("size").get<std::size_t>());
        if (kind == "quantized_interval") return Alphabet::quantized_interval(j.at("cells").get<std::size_t>());
        throw Error(ErrorCode::Config, "unknown alphabet kind '" + kind + "'");
    }
    if (j.contains("distances")) {
        const auto rows = j.at("distances").get<std::vector<std::vector<double>>>();
        std::vector<std::string> labels;
        if (j.contains("labels")) {
            labels = j.at("labels").get<std::vector<std::string>>();
        } else {
            labels = numbered_labels(rows.size());
        }
        std::vector<double> table;
        for (const auto& row : rows) {
            if (row.size() != rows.size()) throw Error(ErrorCode::Config, "distance table must be square");
            table.insert(table.end(), row.begin(), row.end());
        }
        return Alphabet(std::move(labels), std::move(table));
    }
    if (j.contains("points")) {
        std::vector<std::string> labels;
        std::vector<std::vector<double>> coords;
        for (const auto& p : j.at("points")) {
            labels.push_back(p.at("label").get<std::string>());
            if (p.at("coord").is_number()) {
                coords.push_back({p.at("coord").get<double>()});
            } else {
                coords.push_back(p.at("coord").get<std::vector<double>>());
            }
        }
        return Alphabet::from_coordinates(std::move(labels), coords);
    }
    throw Error(ErrorCode::Config, "alphabet needs 'kind', 'distances' or 'points'");
}

}  // namespace

ShiftSystem system_from_json(const nlohmann::json& j) {
    try {
        if (j.contains("schema_version") && j.at("schema_version").get<int>() != 1)
            throw Error(ErrorCode::Config, "unsupported system schema_version");
        auto alphabet = alphabet_from_json(j.at("alphabet"));
        const int window = j.value("window", kDefaultWindow);
        const auto& adm = j.contains("admissibility") ? j.at("admissibility") : nlohmann::json("full");
        if (adm.is_string()) {
            if (adm.get<std::string>() != "full")
                throw Error(ErrorCode::Config, "admissibility must be \"full\" or a transition table");
            return ShiftSystem(std::move(alphabet), window);
        }
        const auto rows = adm.get<std::vector<std::vector<int>>>();
        std::vector<std::uint8_t> allowed;
        for (const auto& row : rows) {
            if (row.size() != rows.size()) throw Error(ErrorCode::Config, "transition table must be square");
            for (int v : row) allowed.push_back(static_cast<std::uint8_t>(v));
        }
        return ShiftSystem(std::move(alphabet), TransitionTable(rows.size(), std::move(allowed)), window);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Config, std::string("system definition: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Config) throw;
        throw Error(ErrorCode::Config, e.what());
    }
}

nlohmann::json system_to_json(const ShiftSystem& system) {
    const auto& a = system.alphabet();
    nlohmann::json out;
    out["schema_version"] = 1;
    if (a.quantization()) {
        out["alphabet"] = {{"kind", "quantized_interval"}, {"cells", *a.quantization()}};
    } else {
        std::vector<std::vector<double>> rows(a.size(), std::vector<double>(a.size()));
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < a.size(); ++j)
                rows[i][j] = a.distance(static_cast<Symbol>(i), static_cast<Symbol>(j));
        out["alphabet"] = {{"labels", a.labels()}, {"distances", rows}};
    }
    if (system.is_full()) {
        out["admissibility"] = "full";
    } else {
        const auto& t = *system.transitions();
        std::vector<std::vector<int>> rows(t.size(), std::vector<int>(t.size()));
        for (std::size_t i = 0; i < t.size(); ++i)
            for (std::size_t j = 0; j < t.size(); ++j)
                rows[i][j] = t.allowed(static_cast<Symbol>(i), static_cast<Symbol>(j)) ? 1 : 0;
        out["admissibility"] = rows;
    }
    out["window"] = system.window();
    return out;
}

ShiftSystem load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Config, "cannot open system file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Config, "system file '" + path + "': " + e.what());
    }
    return system_from_json(j);
}

}  // namespace erl

#include "erl/measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "erl/error.hpp"
#include "erl/info.hpp"

namespace erl {

namespace {

constexpr double kStationaryTolerance = 1e-10;

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t draw(std::span<const double> p, std::mt19937_64& rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        acc += p[i];
        last_positive = i;
        if (u < acc) return i;
    }
    return last_positive;
}

}  // namespace

std::vector<double> stationary_distribution(std::span<const double> transition, std::size_t k) {
    Eigen::MatrixXd a(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
            transition[i * k + j] - (i == j ? 1.0 : 0.0);
    a.row(static_cast<Eigen::Index>(k - 1)).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    b(static_cast<Eigen::Index>(k - 1)) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) throw Error(ErrorCode::InvalidInput, "transition matrix has no unique stationary law");
    Eigen::VectorXd pi = lu.solve(b);

    std::vector<double> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = std::max(0.0, pi(static_cast<Eigen::Index>(i)));
    const double total = std::accumulate(out.begin(), out.end(), 0.0);
    for (auto& v : out) v /= total;

    // Cross-check with power iteration on the lazy chain (P + I) / 2, which has
    // the same stationary law and converges even for periodic P.
    std::vector<double> power(k, 1.0 / static_cast<double>(k)), next(k);
    for (int iter = 0; iter < 1000000; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            next[i] += 0.5 * power[i];
            for (std::size_t j = 0; j < k; ++j) next[j] += 0.5 * power[i] * transition[i * k + j];
        }
        double diff = 0.0;
        for (std::size_t i = 0; i < k; ++i) diff = std::max(diff, std::abs(next[i] - power[i]));
        power.swap(next);
        if (diff < 1e-15) break;
    }
    for (std::size_t i = 0; i < k; ++i)
        if (std::abs(power[i] - out[i]) > kStationaryTolerance)
            throw Error(ErrorCode::InvalidInput, "stationary solve disagrees with power iteration");
    return out;
}

// -----------------------------------------------------------------------------
// ShiftMeasure
// -----------------------------------------------------------------------------

ShiftMeasure ShiftMeasure::bernoulli(std::shared_ptr<const ShiftSystem> system, std::vector<double> p) {
    if (!system) throw Error(ErrorCode::InvalidInput, "measure needs a system");
    if (!system->is_full()) throw Error(ErrorCode::InvalidInput, "Bernoulli measures live on full shifts");
    if (p.size() != system->alphabet().size())
        throw Error(ErrorCode::InvalidInput, "Bernoulli vector length must match the alphabet");
    validate_probabilities(p);
    ShiftMeasure m;
    m.kind_ = Kind::Bernoulli;
    m.system_ = std::move(system);
    m.probabilities_ = std::move(p);
    return m;
}

ShiftMeasure ShiftMeasure::markov(std::shared_ptr<const ShiftSystem> system, std::vector<double> transition) {
    if (!system) throw Error(ErrorCode::InvalidInput, "measure needs a system");
    const std::size_t k = system->alphabet().size();
    if (transition.size() != k * k) throw Error(ErrorCode::InvalidInput, "transition matrix must be k x k");
    for (std::size_t a = 0; a < k; ++a) {
        validate_probabilities(std::span<const double>(transition).subspan(a * k, k));
        for (std::size_t b = 0; b < k; ++b)
            if (transition[a * k + b] > 0.0 &&
                !system->admissible(static_cast<Symbol>(a), static_cast<Symbol>(b)))
                throw Error(ErrorCode::InvalidInput, "transition matrix charges a forbidden transition");
    }
    ShiftMeasure m;
    m.kind_ = Kind::Markov;
    m.system_ = std::move(system);
    m.probabilities_ = stationary_distribution(transition, k);
    m.transition_ = std::move(transition);
    // pi P = pi
    for (std::size_t b = 0; b < k; ++b) {
        double s = 0.0;
        for (std::size_t a = 0; a < k; ++a) s += m.probabilities_[a] * m.transition_[a * k + b];
        if (std::abs(s - m.probabilities_[b]) > kStationaryTolerance)
            throw Error(ErrorCode::InvalidInput, "stationary law is not invariant");
    }
    return m;
}

ShiftMeasure ShiftMeasure::mixture(std::vector<double> weights, std::vector<ShiftMeasure> components) {
    if (components.empty() || weights.size() != components.size())
        throw Error(ErrorCode::InvalidInput, "mixture needs one weight per component");
    validate_probabilities(weights);
    for (const auto& c : components) {
        if (c.kind() == Kind::Mixture) throw Error(ErrorCode::InvalidInput, "nested mixtures are not supported");
        if (c.alphabet_size() != components.front().alphabet_size())
            throw Error(ErrorCode::InvalidInput, "mixture components must share an alphabet");
    }
    ShiftMeasure m;
    m.kind_ = Kind::Mixture;
    m.system_ = components.front().system_ptr();
    m.weights_ = std::move(weights);
    m.components_ = std::move(components);
    return m;
}

std::vector<double> ShiftMeasure::marginal() const {
    if (kind_ != Kind::Mixture) return probabilities_;
    std::vector<double> out(alphabet_size(), 0.0);
    for (std::size_t i = 0; i < components_.size(); ++i) {
        const auto m = components_[i].marginal();
        for (std::size_t a = 0; a < out.size(); ++a) out[a] += weights_[i] * m[a];
    }
    return out;
}

double ShiftMeasure::cylinder_mass(std::span<const Symbol> word) const {
    if (!system_->is_admissible(word)) throw Error(ErrorCode::InadmissibleWord, "word is not admissible");
    switch (kind_) {
        case Kind::Bernoulli: {
            double mass = 1.0;
            for (Symbol s : word) mass *= probabilities_[s];
            return mass;
        }
        case Kind::Markov: {
            if (word.empty()) return 1.0;
            const std::size_t k = alphabet_size();
            double mass = probabilities_[word[0]];
            for (std::size_t i = 1; i < word.size(); ++i) mass *= transition_[word[i - 1] * k + word[i]];
            return mass;
        }
        case Kind::Mixture: {
            double mass = 0.0;
            for (std::size_t i = 0; i < components_.size(); ++i)
                mass += weights_[i] * components_[i].cylinder_mass(word);
            return mass;
        }
    }
    return 0.0;
}

double ShiftMeasure::log_cylinder_mass(std::span<const Symbol> word) const {
    if (!system_->is_admissible(word)) throw Error(ErrorCode::InadmissibleWord, "word is not admissible");
    const double ninf = -std::numeric_limits<double>::infinity();
    switch (kind_) {
        case Kind::Bernoulli: {
            double l = 0.0;
            for (Symbol s : word) l += std::log(probabilities_[s]);
            return l;
        }
        case Kind::Markov: {
            if (word.empty()) return 0.0;
            const std::size_t k = alphabet_size();
            double l = std::log(probabilities_[word[0]]);
            for (std::size_t i = 1; i < word.size(); ++i) l += std::log(transition_[word[i - 1] * k + word[i]]);
            return l;
        }
        case Kind::Mixture: {
            std::vector<double> terms;
            for (std::size_t i = 0; i < components_.size(); ++i)
                if (weights_[i] > 0.0) terms.push_back(std::log(weights_[i]) + components_[i].log_cylinder_mass(word));
            const double top = terms.empty() ? ninf : *std::max_element(terms.begin(), terms.end());
            if (!std::isfinite(top)) return ninf;
            double sum = 0.0;
            for (double t : terms) sum += std::exp(t - top);
            return top + std::log(sum);
        }
    }
    return ninf;
}

double ShiftMeasure::entropy_rate() const {
    switch (kind_) {
        case Kind::Bernoulli: return shannon_entropy(probabilities_);
        case Kind::Markov: {
            const std::size_t k = alphabet_size();
            double h = 0.0;
            for (std::size_t a = 0; a < k; ++a)
                h += probabilities_[a] * shannon_entropy(std::span<const double>(transition_).subspan(a * k, k));
            return h;
        }
        case Kind::Mixture: {
            // Entropy is affine on invariant measures.
            double h = 0.0;
            for (std::size_t i = 0; i < components_.size(); ++i) h += weights_[i] * components_[i].entropy_rate();
            return h;
        }
    }
    return 0.0;
}

std::vector<double> weight_class_law(const ShiftMeasure& measure, std::size_t n) {
    if (!measure.is_exchangeable() || !measure.system().is_full() || measure.alphabet_size() != 2)
        throw Error(ErrorCode::InvalidInput, "weight classes need an exchangeable measure on the binary full shift");
    auto log_binomial = [](double m, double k) {
        return std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0);
    };
    std::vector<double> law(n + 1, 0.0);
    auto add = [&](const ShiftMeasure& bern, double w) {
        const double p0 = bern.probabilities()[0], p1 = bern.probabilities()[1];
        for (std::size_t a = 0; a <= n; ++a) {
            if ((p1 == 0.0 && a > 0) || (p0 == 0.0 && a < n)) continue;
            const double ones = static_cast<double>(a), zeros = static_cast<double>(n - a);
            const double l = log_binomial(static_cast<double>(n), ones) + (a ? ones * std::log(p1) : 0.0) +
                             (n - a ? zeros * std::log(p0) : 0.0);
            law[a] += w * std::exp(l);
        }
    };
    if (measure.kind() == ShiftMeasure::Kind::Mixture) {
        for (std::size_t i = 0; i < measure.components().size(); ++i)
            add(measure.components()[i], measure.weights()[i]);
    } else {
        add(measure, 1.0);
    }
    const double total = std::accumulate(law.begin(), law.end(), 0.0);
    for (auto& v : law) v /= total;
    return law;
}

Word ShiftMeasure::sample_orbit(std::size_t n, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    const ShiftMeasure* source = this;
    if (kind_ == Kind::Mixture) source = &components_[draw(weights_, rng)];
    Word w(n);
    if (n == 0) return w;
    const std::size_t k = alphabet_size();
    if (source->kind_ == Kind::Bernoulli) {
        for (auto& s : w) s = static_cast<Symbol>(draw(source->probabilities_, rng));
    } else {
        w[0] = static_cast<Symbol>(draw(source->probabilities_, rng));
        for (std::size_t i = 1; i < n; ++i)
            w[i] = static_cast<Symbol>(
                draw(std::span<const double>(source->transition_).subspan(w[i - 1] * k, k), rng));
    }
    return w;
}

bool ShiftMeasure::is_exchangeable() const noexcept {
    if (kind_ == Kind::Bernoulli) return true;
    if (kind_ == Kind::Markov) return false;
    return std::all_of(components_.begin(), components_.end(),
                       [](const ShiftMeasure& c) { return c.kind() == Kind::Bernoulli; });
}

std::string ShiftMeasure::describe() const {
    std::ostringstream os;
    os.precision(6);
    auto vec = [&os](const std::vector<double>& v) {
        os << '(';
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
        os << ')';
    };
    switch (kind_) {
        case Kind::Bernoulli: os << "Bernoulli"; vec(probabilities_); break;
        case Kind::Markov: os << "Markov"; vec(transition_); break;
        case Kind::Mixture:
            os << "Mixture[";
            for (std::size_t i = 0; i < components_.size(); ++i)
                os << (i ? " + " : "") << weights_[i] << "*" << components_[i].describe();
            os << ']';
            break;
    }
    return os.str();
}

// -----------------------------------------------------------------------------
// CubeMeasure
// -----------------------------------------------------------------------------

CubeMeasure::CubeMeasure(std::vector<double> weights, std::vector<CubeMarginal> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
    if (components_.empty() || weights_.size() != components_.size())
        throw Error(ErrorCode::InvalidInput, "cube measure needs one weight per component");
    validate_probabilities(weights_);
    for (const auto& c : components_) {
        if (c.lebesgue < 0.0) throw Error(ErrorCode::InvalidInput, "negative Lebesgue weight");
        double total = c.lebesgue;
        for (const auto& [value, mass] : c.atoms) {
            if (value < 0.0 || value > 1.0) throw Error(ErrorCode::InvalidInput, "atom outside [0,1]");
            if (mass < 0.0) throw Error(ErrorCode::InvalidInput, "negative atom mass");
            total += mass;
        }
        if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::InvalidInput, "cube marginal must have mass 1");
    }
}

CubeMeasure CubeMeasure::lebesgue() { return CubeMeasure({1.0}, {CubeMarginal{1.0, {}}}); }

CubeMeasure CubeMeasure::atoms(std::vector<std::pair<double, double>> atoms) {
    return CubeMeasure({1.0}, {CubeMarginal{0.0, std::move(atoms)}});
}

CubeMeasure CubeMeasure::point_mass(double value) { return atoms({{value, 1.0}}); }

std::vector<double> CubeMeasure::cell_masses(std::size_t component, std::size_t m) const {
    const auto& c = components_.at(component);
    std::vector<double> masses(m, c.lebesgue / static_cast<double>(m));
    for (const auto& [value, mass] : c.atoms) {
        auto cell = static_cast<std::size_t>(std::floor(value * static_cast<double>(m)));
        masses[std::min(cell, m - 1)] += mass;
    }
    return masses;
}

ShiftMeasure CubeMeasure::quantize(std::size_t m, int window) const {
    auto system = std::make_shared<const ShiftSystem>(ShiftSystem::quantized_cube(m, window));
    if (components_.size() == 1) return ShiftMeasure::bernoulli(system, cell_masses(0, m));
    std::vector<ShiftMeasure> parts;
    for (std::size_t i = 0; i < components_.size(); ++i)
        parts.push_back(ShiftMeasure::bernoulli(system, cell_masses(i, m)));
    return ShiftMeasure::mixture(weights_, std::move(parts));
}

std::string CubeMeasure::describe() const {
    std::ostringstream os;
    os.precision(6);
    os << "Cube[";
    for (std::size_t i = 0; i < components_.size(); ++i) {
        os << (i ? " + " : "") << weights_[i] << "*(";
        os << "leb=" << components_[i].lebesgue;
        for (const auto& [v, mass] : components_[i].atoms) os << ", " << mass << "@" << v;
        os << ')';
    }
    os << ']';
    return os.str();
}

// -----------------------------------------------------------------------------
// JSON
// -----------------------------------------------------------------------------

ShiftMeasure measure_from_json(const nlohmann::json& j, std::shared_ptr<const ShiftSystem> system) {
    try {
        if (j.contains("schema_version") && j.at("schema_version").get<int>() != 1)
            throw Error(ErrorCode::Config, "unsupported measure schema_version");
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "bernoulli") return ShiftMeasure::bernoulli(system, j.at("p").get<std::vector<double>>());
        if (kind == "markov") {
            const auto rows = j.at("P").get<std::vector<std::vector<double>>>();
            std::vector<double> flat;
            for (const auto& r : rows) {
                if (r.size() != rows.size()) throw Error(ErrorCode::Config, "P must be square");
                flat.insert(flat.end(), r.begin(), r.end());
            }
            return ShiftMeasure::markov(system, std::move(flat));
        }
        if (kind == "mixture") {
            std::vector<ShiftMeasure> parts;
            for (const auto& c : j.at("components")) parts.push_back(measure_from_json(c, system));
            return ShiftMeasure::mixture(j.at("weights").get<std::vector<double>>(), std::move(parts));
        }
        throw Error(ErrorCode::Config, "unknown measure kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Config, std::string("measure definition: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Config) throw;
        throw Error(ErrorCode::Config, e.what());
    }
}

nlohmann::json measure_to_json(const ShiftMeasure& measure) {
    nlohmann::json out;
    out["schema_version"] = 1;
    switch (measure.kind()) {
        case ShiftMeasure::Kind::Bernoulli:
            out["kind"] = "bernoulli";
            out["p"] = measure.probabilities();
            break;
        case ShiftMeasure::Kind::Markov: {
            const std::size_t k = measure.alphabet_size();
            std::vector<std::vector<double>> rows(k);
            for (std::size_t a = 0; a < k; ++a)
                rows[a].assign(measure.transition().begin() + static_cast<long>(a * k),
                               measure.transition().begin() + static_cast<long>((a + 1) * k));
            out["kind"] = "markov";
            out["P"] = rows;
            break;
        }
        case ShiftMeasure::Kind::Mixture: {
            out["kind"] = "mixture";
            out["weights"] = measure.weights();
            out["components"] = nlohmann::json::array();
            for (const auto& c : measure.components()) out["components"].push_back(measure_to_json(c));
            break;
        }
    }
    return out;
}

bool is_cube_measure_json(const nlohmann::json& j) {
    return j.is_object() && j.contains("kind") && j.at("kind").is_string() && j.at("kind").get<std::string>() == "cube";
}

CubeMeasure cube_measure_from_json(const nlohmann::json& j) {
    try {
        std::vector<double> weights;
        std::vector<CubeMarginal> parts;
        for (const auto& c : j.at("components")) {
            weights.push_back(c.value("weight", 1.0));
            CubeMarginal marginal;
            marginal.lebesgue = c.value("lebesgue", 0.0);
            if (c.contains("atoms"))
                for (const auto& a : c.at("atoms")) marginal.atoms.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
            parts.push_back(std::move(marginal));
        }
        return CubeMeasure(std::move(weights), std::move(parts));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Config, std::string("cube measure definition: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Config) throw;
        throw Error(ErrorCode::Config, e.what());
    }
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Config, "cannot open '" + path + "'");
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Config, "'" + path + "': " + e.what());
    }
}

}  // namespace erl

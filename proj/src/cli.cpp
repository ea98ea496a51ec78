#include "erl/cli.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "erl/entropy.hpp"
#include "erl/error.hpp"
#include "erl/mean_dimension.hpp"
#include "erl/measure.hpp"
#include "erl/parallel.hpp"
#include "erl/rate_distortion.hpp"
#include "erl/verify.hpp"

namespace erl::cli {

using nlohmann::json;
namespace fs = std::filesystem;

// =============================================================================
// Cells and tables
// =============================================================================

std::string format_cell(const Cell& cell) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
            else if constexpr (std::is_same_v<T, std::string>) return v;
            else return fmt::format("{}", v);
        },
        cell);
}

Cell parse_cell(const std::string& text) {
    const char* b = text.data();
    const char* e = b + text.size();
    long long i = 0;
    if (auto [p, ec] = std::from_chars(b, e, i); ec == std::errc() && p == e && !text.empty()) return i;
    double d = 0.0;
    if (auto [p, ec] = std::from_chars(b, e, d); ec == std::errc() && p == e && !text.empty()) return d;
    if (text == "true") return true;
    if (text == "false") return false;
    return text;
}

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

std::vector<std::vector<std::string>> csv_records(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> rec;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') field += '"', ++i;
            else if (c == '"') quoted = false;
            else field += c;
        } else if (c == '"') {
            quoted = any = true;
        } else if (c == ',') {
            rec.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n') {
            if (any || !field.empty()) rec.push_back(std::move(field)), records.push_back(std::move(rec));
            rec.clear();
            field.clear();
            any = false;
        } else if (c != '\r') {
            field += c;
            any = true;
        }
    }
    if (quoted) throw Error(ErrorCode::Config, "unterminated quote in CSV");
    if (any || !field.empty()) rec.push_back(std::move(field)), records.push_back(std::move(rec));
    return records;
}

json cell_to_json(const Cell& c) {
    return std::visit([](const auto& v) { return json(v); }, c);
}

Cell json_to_cell(const json& j) {
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number_integer()) return j.get<long long>();
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    return j.dump();
}

}  // namespace

std::string to_csv(const Table& table) {
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) out += (i ? "," : "") + csv_escape(table.columns[i]);
    out += "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_escape(format_cell(row[i]));
        out += "\n";
    }
    return out;
}

Table from_csv(const std::string& text) {
    const auto records = csv_records(text);
    if (records.empty()) throw Error(ErrorCode::Config, "empty CSV");
    Table t;
    t.columns = records[0];
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != t.columns.size())
            throw Error(ErrorCode::Config, fmt::format("CSV row {} has {} fields, expected {}", r + 1,
                                                       records[r].size(), t.columns.size()));
        std::vector<Cell> row;
        for (const auto& f : records[r]) row.push_back(parse_cell(f));
        t.rows.push_back(std::move(row));
    }
    return t;
}

json to_json(const std::string& command, const Table& table) {
    json rows = json::array();
    for (const auto& row : table.rows) {
        json r = json::array();
        for (const auto& c : row) r.push_back(cell_to_json(c));
        rows.push_back(std::move(r));
    }
    return {{"schema_version", 1}, {"command", command}, {"columns", table.columns}, {"rows", rows}};
}

Table table_from_json(const json& j) {
    try {
        Table t;
        t.columns = j.at("columns").get<std::vector<std::string>>();
        for (const auto& r : j.at("rows")) {
            std::vector<Cell> row;
            for (const auto& c : r) row.push_back(json_to_cell(c));
            if (row.size() != t.columns.size()) throw Error(ErrorCode::Config, "JSON row width mismatch");
            t.rows.push_back(std::move(row));
        }
        return t;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Config, std::string("results JSON: ") + e.what());
    }
}

std::string make_report(const std::string& command, const Table& table) {
    std::string out = fmt::format("# {} results\n\n{} rows.\n\n|", command, table.rows.size());
    for (const auto& c : table.columns) out += " " + c + " |";
    out += "\n|";
    for (std::size_t i = 0; i < table.columns.size(); ++i) out += " --- |";
    out += "\n";
    for (const auto& row : table.rows) {
        out += "|";
        for (const auto& c : row) out += " " + format_cell(c) + " |";
        out += "\n";
    }

    // Curves get a dimension fit recomputed from the rows alone.
    if (table.columns == std::vector<std::string>{"scale", "lower", "upper"} && !table.rows.empty()) {
        ScalingCurve curve;
        bool cells = true;
        for (const auto& row : table.rows) {
            auto num = [](const Cell& c) {
                if (auto* d = std::get_if<double>(&c)) return *d;
                if (auto* i = std::get_if<long long>(&c)) return static_cast<double>(*i);
                throw Error(ErrorCode::Config, "non-numeric curve cell");
            };
            curve.points.push_back({num(row[0]), num(row[1]), num(row[2])});
            cells = cells && curve.points.back().scale > 1.0;
        }
        curve.kind = cells ? ScalingCurve::ScaleKind::Cells : ScalingCurve::ScaleKind::Epsilon;
        out += "\n## Dimension fit\n\n";
        try {
            const auto d = dimension_fit(curve);
            out += fmt::format("- scale kind: {}\n", to_string(curve.kind));
            out += fmt::format("- slope: lower {:.6f}, upper {:.6f}\n", d.slope_lower, d.slope_upper);
            out += fmt::format("- residual: lower {:.3e}, upper {:.3e}\n", d.residual_lower, d.residual_upper);
            out += fmt::format("- endpoint ratio: lower {:.6f}, upper {:.6f}\n", d.endpoint_lower, d.endpoint_upper);
            out += fmt::format("- finer-half ratio range: [{:.6f}, {:.6f}], floor [{:.6f}, {:.6f}]\n", d.lower, d.upper,
                               d.floor_lower, d.floor_upper);
        } catch (const Error& e) {
            out += fmt::format("- fit unavailable: {}\n", e.what());
        }
    }
    return out;
}

// =============================================================================
// Commands
// =============================================================================

namespace {

template <class T>
T cfg_get(const json& cfg, const std::string& key, const T& fallback) {
    if (!cfg.contains(key)) return fallback;
    try {
        return cfg.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Config, "config key '" + key + "': " + e.what());
    }
}

template <class T>
T cfg_require(const json& cfg, const std::string& key) {
    if (!cfg.contains(key)) throw Error(ErrorCode::Config, "missing required config key '" + key + "'");
    return cfg_get<T>(cfg, key, T{});
}

template <class T>
std::vector<T> nonempty(std::vector<T> v, const std::string& key) {
    if (v.empty()) throw Error(ErrorCode::Config, "'" + key + "' must be a nonempty list");
    return v;
}

json load_ref(const json& ref) { return ref.is_string() ? read_json_file(ref.get<std::string>()) : ref; }

std::shared_ptr<const ShiftSystem> load_system_cfg(const json& cfg) {
    if (!cfg.contains("system")) return nullptr;
    return std::make_shared<const ShiftSystem>(system_from_json(load_ref(cfg.at("system"))));
}

struct Loaded {
    std::shared_ptr<const ShiftSystem> system;
    std::optional<ShiftMeasure> measure;  // on the system, or the quantized cube measure
    std::optional<CubeMeasure> cube;
};

// A cube measure is quantized at "m" when present.
Loaded load_measure_cfg(const json& cfg, bool need_shift_measure) {
    Loaded l;
    l.system = load_system_cfg(cfg);
    if (!cfg.contains("measure")) throw Error(ErrorCode::Config, "missing required config key 'measure'");
    const json mj = load_ref(cfg.at("measure"));
    if (is_cube_measure_json(mj)) {
        l.cube = cube_measure_from_json(mj);
        if (cfg.contains("m")) {
            if (!cfg.at("m").is_number_unsigned())
                throw Error(ErrorCode::Config, "'m' must be a single cell count here");
            l.measure = l.cube->quantize(cfg.at("m").get<std::size_t>());
            l.system = l.measure->system_ptr();
        } else if (need_shift_measure) {
            throw Error(ErrorCode::Config, "a cube measure needs 'm' (cell count) for this command");
        }
        return l;
    }
    if (!l.system) throw Error(ErrorCode::Config, "measure needs a 'system'");
    l.measure = measure_from_json(mj, l.system);
    return l;
}

Table run_rd(const json& cfg, std::size_t jobs) {
    const auto loaded = load_measure_cfg(cfg, true);
    const auto family = rd_family_from_string(cfg_get<std::string>(cfg, "family", "lp"));
    const double p = cfg_get(cfg, "p", 1.0);
    const auto eps = nonempty(cfg_require<std::vector<double>>(cfg, "eps"), "eps");
    const bool two_axis = family == RDFamily::LInf || family == RDFamily::RLimit;
    std::vector<double> fractions{0.0};
    if (two_axis) {
        const char* key = cfg.contains("r") ? "r" : "s";
        fractions = nonempty(cfg_require<std::vector<double>>(cfg, key), key);
    }
    const auto n_list = nonempty(cfg_get(cfg, "n", std::vector<std::size_t>{1}), "n");
    const auto metric_name = cfg_get<std::string>(cfg, "metric", "single");
    if (metric_name != "single" && metric_name != "windowed")
        throw Error(ErrorCode::Config, "metric must be 'single' or 'windowed'");
    const auto metric = metric_name == "single" ? MetricMode::SingleCoordinate : MetricMode::WindowedProduct;
    RateDistortionOptions opt;
    opt.ba.tolerance = cfg_get(cfg, "tolerance", opt.ba.tolerance);
    const auto path = cfg_get<std::string>(cfg, "solver", "auto");
    if (path == "dense") opt.path = SolverPath::Dense;
    else if (path == "exchangeable") opt.path = SolverPath::Exchangeable;
    else if (path != "auto") throw Error(ErrorCode::Config, "solver must be auto, dense or exchangeable");

    struct Pt {
        double eps, fraction;
        std::size_t n;
        RDResult r;
    };
    std::vector<Pt> pts;
    for (double e : eps)
        for (double f : fractions)
            for (auto n : n_list) pts.push_back({e, f, n, {}});
    for (const auto& pt : pts) make_spec(family, p, pt.eps, pt.fraction, pt.n, metric).validate();
    parallel_for(pts.size(), jobs, [&](std::size_t i) {
        auto& pt = pts[i];
        pt.r = rate_distortion_function(*loaded.measure, make_spec(family, p, pt.eps, pt.fraction, pt.n, metric), opt);
    });
    Table t{{"epsilon", "s_or_r", "n", "rate_nats", "distortion", "converged"}, {}};
    for (const auto& pt : pts)
        t.rows.push_back({pt.eps, pt.fraction, static_cast<long long>(pt.n), pt.r.rate, pt.r.achieved_distortion,
                          pt.r.converged});
    return t;
}

Table run_entropy(const json& cfg, std::size_t jobs) {
    const auto estimator = cfg_get<std::string>(cfg, "estimator", "ks");
    const auto eps = nonempty(cfg_get(cfg, "eps", std::vector<double>{}), "eps");
    const auto delta = nonempty(cfg_get(cfg, "delta", std::vector<double>{0.1}), "delta");
    const auto n_list = nonempty(cfg_get(cfg, "n", std::vector<std::size_t>{8}), "n");
    const auto samples = cfg_get<std::size_t>(cfg, "samples", 100);
    const auto seed = cfg_get<std::uint64_t>(cfg, "seed", 1);
    const auto cap = cfg_get<std::size_t>(cfg, "cap", kDefaultEnumerationCap);
    Table t{{"estimator", "eps", "delta", "n", "lower", "upper", "kind"}, {}};
    auto add = [&](double e, double d, const EstimatePoint& pt, const EntropyEstimate& est) {
        t.rows.push_back({estimator, e, d, static_cast<long long>(pt.n), pt.lower, pt.upper, to_string(est.kind)});
    };
    auto add_est = [&](double e, double d, const EntropyEstimate& est) {
        t.rows.push_back({estimator, e, d, static_cast<long long>(est.n_used), est.lower, est.upper,
                          to_string(est.kind)});
    };

    if (estimator == "topological") {
        const auto sys = load_system_cfg(cfg);
        if (!sys) throw Error(ErrorCode::Config, "topological entropy needs a 'system'");
        for (double e : eps) {
            const auto est = topological_eps_entropy(*sys, e, n_list, {cap, jobs});
            for (const auto& pt : est.per_n) add(e, 0.0, pt, est);
        }
        return t;
    }
    const auto loaded = load_measure_cfg(cfg, true);
    const auto& mu = *loaded.measure;
    const CoverOptions cover{cap, jobs};
    if (estimator == "ks") {
        KsOptions o;
        o.rd_lower = cfg_get(cfg, "rd_lower", true);
        o.rd_block_length = n_list.front();
        for (double e : eps) add_est(e, 0.0, ks_eps_entropy(mu, e, o));
    } else if (estimator == "block") {
        const auto window = cfg_get<std::size_t>(cfg, "window", 0);
        const auto fam = PartitionFamily::alphabet(mu.system(), window);
        for (auto n : n_list) {
            const double h = block_entropy(mu, fam, n, cap) / static_cast<double>(n);
            t.rows.push_back({estimator, fam.diameter_bound, 0.0, static_cast<long long>(n), h, h, "exact"});
        }
    } else if (estimator == "katok") {
        for (double e : eps)
            for (double d : delta) {
                const auto est = katok_eps_entropy(mu, e, d, n_list, cover);
                for (const auto& pt : est.per_n) add(e, d, pt, est);
            }
    } else if (estimator == "shapira") {
        for (double e : eps)
            for (double d : delta)
                for (auto n : n_list) add_est(e, d, shapira_count(mu, e, d, n, cover));
    } else if (estimator == "brin-katok") {
        for (double e : eps)
            for (auto n : n_list) add_est(e, 0.0, brin_katok_local(mu, e, n, samples, seed, cover));
    } else if (estimator == "pfister-sullivan") {
        const auto eta = nonempty(cfg_get(cfg, "eta", std::vector<double>{0.1}), "eta");
        const auto hood = cfg_get<std::string>(cfg, "neighborhood", "symbols");
        if (hood != "symbols" && hood != "pairs") throw Error(ErrorCode::Config, "neighborhood must be symbols or pairs");
        const auto kind = hood == "pairs" ? NeighborhoodKind::PairFrequencies : NeighborhoodKind::SymbolFrequencies;
        for (double e : eps)
            for (double h : eta)
                for (auto n : n_list) add_est(e, h, pfister_sullivan(mu, e, h, n, kind, cap));
    } else {
        throw Error(ErrorCode::Config, "unknown estimator '" + estimator +
                                           "' (ks, block, katok, shapira, brin-katok, pfister-sullivan, topological)");
    }
    return t;
}

Table curve_table(const DimensionEstimate& d) {
    Table t{{"scale", "lower", "upper"}, {}};
    for (const auto& pt : d.curve.points) {
        if (d.curve.kind == ScalingCurve::ScaleKind::Cells)
            t.rows.push_back({static_cast<long long>(pt.scale), pt.lower, pt.upper});
        else
            t.rows.push_back({pt.scale, pt.lower, pt.upper});
    }
    return t;
}

std::vector<double> eps_grid(const json& cfg) {
    if (cfg.contains("eps_exponents")) {
        std::vector<double> g;
        for (int j : cfg_get<std::vector<int>>(cfg, "eps_exponents", {})) g.push_back(std::ldexp(1.0, -j));
        return nonempty(g, "eps_exponents");
    }
    return nonempty(cfg_require<std::vector<double>>(cfg, "eps"), "eps");
}

std::vector<std::size_t> m_grid(const json& cfg, const char* key) {
    if (cfg.contains("m_exponents")) {
        std::vector<std::size_t> g;
        for (int j : cfg_get<std::vector<int>>(cfg, "m_exponents", {})) {
            if (j < 1 || j > 24) throw Error(ErrorCode::Config, "m exponent out of range");
            g.push_back(std::size_t{1} << j);
        }
        return nonempty(g, "m_exponents");
    }
    return nonempty(cfg_require<std::vector<std::size_t>>(cfg, key), key);
}

Table run_mdim(const json& cfg, std::size_t jobs) {
    const auto n_list = nonempty(cfg_get(cfg, "n", std::vector<std::size_t>{1}), "n");
    const TopologicalOptions o{cfg_get<std::size_t>(cfg, "cap", kDefaultEnumerationCap), jobs};
    if (cfg.contains("cube_m") || cfg.contains("m_exponents"))
        return curve_table(metric_mean_dimension_cube(m_grid(cfg, "cube_m"), n_list, o));
    const auto sys = load_system_cfg(cfg);
    if (!sys) throw Error(ErrorCode::Config, "mdim needs a 'system' with an eps grid, or 'cube_m'");
    return curve_table(metric_mean_dimension(*sys, eps_grid(cfg), n_list, o));
}

Table run_mrid(const json& cfg, std::size_t jobs) {
    MridOptions o;
    o.jobs = jobs;
    o.ks.rd_lower = cfg_get(cfg, "rd_floor", false);
    o.ks.rd_block_length = cfg_get<std::size_t>(cfg, "rd_block_length", 1);
    if (cfg.contains("measure")) {
        const json mj = load_ref(cfg.at("measure"));
        if (is_cube_measure_json(mj)) return curve_table(mrid(cube_measure_from_json(mj), m_grid(cfg, "m"), o));
    }
    const auto loaded = load_measure_cfg(cfg, true);
    return curve_table(mrid(*loaded.measure, eps_grid(cfg), o));
}

Table run_idr(const json& cfg, std::size_t jobs) {
    if (!cfg.contains("measure")) throw Error(ErrorCode::Config, "missing required config key 'measure'");
    const json mj = load_ref(cfg.at("measure"));
    const auto grid = m_grid(cfg, "m");
    if (!is_cube_measure_json(mj)) {
        const auto sys = load_system_cfg(cfg);
        if (!sys) throw Error(ErrorCode::NotQuantizable, "measure is not a cube measure");
        information_dimension_rate(measure_from_json(mj, sys), grid);
    }
    return curve_table(information_dimension_rate(cube_measure_from_json(mj), grid, jobs));
}

Table claims_table(const ScenarioReport& rep) {
    Table t{{"scenario", "claim", "status", "tolerance"}, {}};
    for (const auto& c : rep.claims) t.rows.push_back({rep.id, c.description, to_string(c.status), c.tolerance});
    return t;
}

ScenarioReport run_verify(const json& cfg, std::size_t jobs) {
    const auto id = cfg_require<std::string>(cfg, "scenario");
    json params = json::object();
    if (cfg.contains("params")) params = load_ref(cfg.at("params"));
    return run_scenario(id, params, jobs);
}

Table run_sweep(const json& cfg, std::size_t jobs) {
    const auto target = cfg_require<std::string>(cfg, "target");
    if (target == "sweep" || target == "report") throw Error(ErrorCode::Config, "cannot sweep '" + target + "'");
    const json base = cfg_get(cfg, "base", json::object());
    const json grid = cfg_get(cfg, "grid", json::object());
    if (!base.is_object() || !grid.is_object()) throw Error(ErrorCode::Config, "'base' and 'grid' must be objects");
    std::vector<std::string> keys;
    std::vector<std::vector<json>> values;
    for (const auto& [k, v] : grid.items()) {
        if (!v.is_array() || v.empty()) throw Error(ErrorCode::Config, "grid entry '" + k + "' must be a nonempty list");
        keys.push_back(k);
        values.push_back(v.get<std::vector<json>>());
    }
    std::vector<json> combos{json::object()};
    for (std::size_t i = 0; i < keys.size(); ++i) {
        std::vector<json> next;
        for (const auto& c : combos)
            for (const auto& v : values[i]) {
                json cc = c;
                cc[keys[i]] = v;
                next.push_back(std::move(cc));
            }
        combos = std::move(next);
    }
    std::vector<Table> parts(combos.size());
    parallel_for(combos.size(), jobs, [&](std::size_t i) {
        json c = base;
        for (const auto& [k, v] : combos[i].items()) c[k] = v;
        parts[i] = target == "verify" ? claims_table(run_verify(c, 1)) : run_command(target, c, 1);
    });
    Table t;
    t.columns = keys;
    if (!parts.empty()) t.columns.insert(t.columns.end(), parts[0].columns.begin(), parts[0].columns.end());
    for (std::size_t i = 0; i < combos.size(); ++i)
        for (const auto& row : parts[i].rows) {
            std::vector<Cell> r;
            for (const auto& k : keys) {
                const auto& v = combos[i].at(k);
                r.push_back(v.is_primitive() ? json_to_cell(v) : Cell{v.dump()});
            }
            r.insert(r.end(), row.begin(), row.end());
            t.rows.push_back(std::move(r));
        }
    return t;
}

}  // namespace

Table run_command(const std::string& command, const json& cfg, std::size_t jobs) {
    jobs = std::max<std::size_t>(jobs, 1);
    if (command == "rd") return run_rd(cfg, jobs);
    if (command == "entropy") return run_entropy(cfg, jobs);
    if (command == "mdim") return run_mdim(cfg, jobs);
    if (command == "mrid") return run_mrid(cfg, jobs);
    if (command == "idr") return run_idr(cfg, jobs);
    if (command == "sweep") return run_sweep(cfg, jobs);
    if (command == "verify") return claims_table(run_verify(cfg, jobs));
    throw Error(ErrorCode::Config, "unknown command '" + command + "'");
}

// =============================================================================
// Argument parsing and run directories
// =============================================================================

namespace {

template <class T>
struct is_vector : std::false_type {};
template <class T>
struct is_vector<std::vector<T>> : std::true_type {};

// A subcommand whose options land in the JSON config only when given.
struct Sub {
    CLI::App* app = nullptr;
    std::vector<std::function<void(json&)>> setters;

    template <class T>
    void option(const std::string& flags, const std::string& key, const std::string& help) {
        auto holder = std::make_shared<T>();
        CLI::Option* o = app->add_option(flags, *holder, help);
        if constexpr (is_vector<T>::value) o->delimiter(',');
        setters.push_back([o, holder, key](json& cfg) {
            if (o->count()) cfg[key] = *holder;
        });
    }
    void flag(const std::string& flags, const std::string& key, const std::string& help) {
        auto holder = std::make_shared<bool>(false);
        CLI::Option* o = app->add_flag(flags, *holder, help);
        setters.push_back([o, holder, key](json& cfg) {
            if (o->count()) cfg[key] = *holder;
        });
    }
};

struct Common {
    std::string config;
    std::string out;
    std::string runs_dir = "runs";
    std::string format = "csv";
    std::size_t jobs = default_jobs();
    bool timing = false;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "JSON config file; flags override its keys");
    app->add_option("--out", c.out, "run directory (default <runs-dir>/<timestamp>-<command>)");
    app->add_option("--runs-dir", c.runs_dir, "parent of generated run directories");
    app->add_option("--format", c.format, "results file format")->check(CLI::IsMember({"csv", "json"}));
    app->add_option("--jobs", c.jobs, "worker threads (default ERL_JOBS or 1)")->check(CLI::PositiveNumber);
    app->add_flag("--timing", c.timing, "include wall time in reports");
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
    return buf;
}

fs::path make_run_dir(const Common& c, const std::string& command) {
    fs::path dir;
    if (!c.out.empty()) {
        dir = c.out;
    } else {
        const fs::path base = fs::path(c.runs_dir) / (timestamp() + "-" + command);
        dir = base;
        for (int k = 2; fs::exists(dir); ++k) dir = base.string() + "-" + std::to_string(k);
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Config, "cannot create run directory '" + dir.string() + "': " + ec.message());
    return dir;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorCode::Config, "cannot write '" + p.string() + "'");
    f << text;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::Config, "cannot open '" + path + "'");
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

void write_results(const fs::path& dir, const Common& c, const std::string& command, const json& cfg,
                   const Table& table) {
    write_file(dir / "config.json", cfg.dump(2) + "\n");
    if (c.format == "json") write_file(dir / "results.json", to_json(command, table).dump(2) + "\n");
    else write_file(dir / "results.csv", to_csv(table));
    write_file(dir / "report.md", make_report(command, table));
}

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::Config:
        case ErrorCode::UnknownScenario: return kConfigError;
        default: return kComputationError;
    }
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"erl: entropy, rate-distortion and mean dimension laboratory for shift systems"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "show the full grammar of every subcommand");

    std::map<std::string, Sub> subs;
    std::map<std::string, Common> common;
    auto sub = [&](const std::string& name, const std::string& help) -> Sub& {
        Sub& s = subs[name];
        s.app = app.add_subcommand(name, help);
        add_common(s.app, common[name]);
        return s;
    };

    {
        Sub& s = sub("entropy", "measure-theoretic and topological eps-entropy estimators");
        s.option<std::string>("--system", "system", "system JSON file");
        s.option<std::string>("--measure", "measure", "measure JSON file");
        s.option<std::string>("--estimator", "estimator",
                              "ks | block | katok | shapira | brin-katok | pfister-sullivan | topological");
        s.option<std::vector<double>>("--eps", "eps", "eps grid (comma separated)");
        s.option<std::vector<double>>("--delta", "delta", "delta grid (Katok, Shapira)");
        s.option<std::vector<double>>("--eta", "eta", "frequency tolerance grid (Pfister-Sullivan)");
        s.option<std::vector<std::size_t>>("--n", "n", "block lengths");
        s.option<std::size_t>("--samples", "samples", "orbit samples (Brin-Katok)");
        s.option<std::uint64_t>("--seed", "seed", "first sample seed (Brin-Katok)");
        s.option<std::size_t>("--window", "window", "partition window N (block)");
        s.option<std::size_t>("--m", "m", "cell count for a cube measure");
        s.option<std::string>("--neighborhood", "neighborhood", "symbols | pairs (Pfister-Sullivan)");
        s.option<std::size_t>("--cap", "cap", "word enumeration cap");
    }
    {
        Sub& s = sub("rd", "rate-distortion function by Blahut-Arimoto");
        s.option<std::string>("--system", "system", "system JSON file");
        s.option<std::string>("--measure", "measure", "measure JSON file");
        s.option<std::string>("--family", "family", "lp | linf | bowen | r");
        s.option<double>("--p", "p", "exponent of the lp family");
        s.option<std::vector<double>>("--eps", "eps", "eps grid");
        s.option<std::vector<double>>("--s", "s", "fraction grid s (linf)");
        s.option<std::vector<double>>("--r", "r", "mistake fraction grid r (r)");
        s.option<std::vector<std::size_t>>("--n", "n", "block lengths");
        s.option<std::string>("--metric", "metric", "single | windowed");
        s.option<double>("--tol", "tolerance", "dual-gap tolerance");
        s.option<std::string>("--solver", "solver", "auto | dense | exchangeable");
        s.option<std::size_t>("--m", "m", "cell count for a cube measure");
    }
    {
        Sub& s = sub("mdim", "metric mean dimension from topological eps-entropy");
        s.option<std::string>("--system", "system", "system JSON file");
        s.option<std::vector<double>>("--eps", "eps", "eps grid, strictly decreasing");
        s.option<std::vector<int>>("--eps-exponents", "eps_exponents", "eps = 2^-j grid");
        s.option<std::vector<std::size_t>>("--cube-m", "cube_m", "quantized cube cell counts, eps = 1/m");
        s.option<std::vector<int>>("--m-exponents", "m_exponents", "cube cell counts m = 2^j");
        s.option<std::vector<std::size_t>>("--n", "n", "block lengths");
    }
    {
        Sub& s = sub("mrid", "mean Renyi information dimension from KS eps-entropy");
        s.option<std::string>("--system", "system", "system JSON file");
        s.option<std::string>("--measure", "measure", "measure JSON file (cube measures use eps = 1/m)");
        s.option<std::vector<double>>("--eps", "eps", "eps grid");
        s.option<std::vector<int>>("--eps-exponents", "eps_exponents", "eps = 2^-j grid");
        s.option<std::vector<std::size_t>>("--m", "m", "cell counts for a cube measure");
        s.option<std::vector<int>>("--m-exponents", "m_exponents", "cell counts m = 2^j");
        s.flag("--rd-floor", "rd_floor", "also compute the rate-distortion lower end");
        s.option<std::size_t>("--rd-block-length", "rd_block_length", "block length of the rate-distortion floor");
    }
    {
        Sub& s = sub("idr", "information dimension rate of a cube measure");
        s.option<std::string>("--system", "system", "system JSON file (fixed-alphabet measures are rejected)");
        s.option<std::string>("--measure", "measure", "cube measure JSON file");
        s.option<std::vector<std::size_t>>("--m", "m", "cell counts");
        s.option<std::vector<int>>("--m-exponents", "m_exponents", "cell counts m = 2^j");
    }
    {
        Sub& s = sub("sweep", "run a command over the cartesian product of a config grid");
        s.option<std::string>("--target", "target", "command to sweep");
    }
    {
        Sub& s = sub("verify", "run a named verification scenario");
        s.option<std::string>("--scenario", "scenario", "scenario id");
        s.option<std::string>("--params", "params", "scenario parameter JSON file");
        s.option<std::string>("--json", "json", "also write the JSON report here");
        subs["verify"].app->add_flag_callback(
            "--list",
            [&out] {
                for (const auto& id : scenario_ids()) out << id << "\n";
                throw CLI::Success();
            },
            "list scenario ids");
    }
    std::string report_input, report_command;
    {
        Sub& s = sub("report", "regenerate the summary of an emitted results CSV or JSON");
        s.app->add_option("--input", report_input, "results.csv or results.json")->required();
        s.app->add_option("--command", report_command, "command name (default: from the sibling config.json)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            if (dynamic_cast<const CLI::Success*>(&e) == nullptr) out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
            return kOk;
        }
        err << "error: " << e.what() << "\n";
        const auto used = app.get_subcommands();
        err << (used.empty() ? app.help() : used.front()->help());
        return kConfigError;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    Common& c = common[name];
    try {
        if (name == "report") {
            Table table;
            std::string command = report_command;
            if (report_input.size() >= 5 && report_input.substr(report_input.size() - 5) == ".json") {
                const json j = read_json_file(report_input);
                table = table_from_json(j);
                if (command.empty()) command = j.value("command", "");
            } else {
                table = from_csv(read_file(report_input));
            }
            if (command.empty()) {
                const fs::path sibling = fs::path(report_input).parent_path() / "config.json";
                if (fs::exists(sibling)) command = read_json_file(sibling.string()).value("command", "");
            }
            if (command.empty()) command = "results";
            const std::string report = make_report(command, table);
            const json cfg = {{"schema_version", 1}, {"command", "report"}, {"input", report_input},
                              {"source_command", command}};
            const auto dir = make_run_dir(c, "report");
            write_results(dir, c, command, cfg, table);
            out << report;
            out << fmt::format("report: {} rows from {} -> {}\n", table.rows.size(), report_input, dir.string());
            return kOk;
        }

        json cfg = json::object();
        if (!c.config.empty()) {
            cfg = read_json_file(c.config);
            if (!cfg.is_object()) throw Error(ErrorCode::Config, "config '" + c.config + "' must be a JSON object");
            if (cfg.contains("schema_version") && cfg.at("schema_version") != 1)
                throw Error(ErrorCode::Config, "unsupported config schema_version in '" + c.config + "'");
            if (cfg.contains("command") && cfg.at("command") != name)
                throw Error(ErrorCode::Config, "config '" + c.config + "' is for command " + cfg.at("command").dump());
        }
        for (const auto& set : subs[name].setters) set(cfg);
        cfg["schema_version"] = 1;
        cfg["command"] = name;

        const auto t0 = std::chrono::steady_clock::now();
        if (name == "verify") {
            const auto rep = run_verify(cfg, c.jobs);
            const Table table = claims_table(rep);
            const auto dir = make_run_dir(c, name);
            write_results(dir, c, name, cfg, table);
            const std::string report_json = rep.to_json(c.timing).dump(2) + "\n";
            write_file(dir / "report.json", report_json);
            if (cfg.contains("json")) write_file(cfg_get<std::string>(cfg, "json", ""), report_json);
            out << rep.to_text(c.timing);
            out << fmt::format("verify {}: {} ({} claims) -> {}\n", rep.id, rep.passed() ? "PASS" : "FAIL",
                               rep.claims.size(), dir.string());
            return rep.passed() ? kOk : kScenarioFailed;
        }
        const Table table = run_command(name, cfg, c.jobs);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const auto dir = make_run_dir(c, name);
        write_results(dir, c, name, cfg, table);
        std::string last;
        if (!table.rows.empty())
            for (std::size_t i = 0; i < table.columns.size(); ++i)
                last += fmt::format("{}{}={}", i ? " " : "", table.columns[i], format_cell(table.rows.back()[i]));
        out << fmt::format("{}: {} rows -> {}{}{}\n", name, table.rows.size(), dir.string(),
                           last.empty() ? "" : "; last row: " + last,
                           c.timing ? fmt::format(" ({:.2f} s)", secs) : "");
        return kOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kComputationError;
    }
}

}  // namespace erl::cli

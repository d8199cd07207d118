#include "nbf/app/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "nbf/integrators.hpp"

namespace nbf::app {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::ConfigError, path + ": " + what);
}

std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string index(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

void check_object(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) {
        fail(path.empty() ? "<root>" : path, "expected an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            fail(join(path, key), "unknown key");
        }
    }
}

const json& require(const json& j, std::string_view key, const std::string& path) {
    const auto it = j.find(std::string(key));
    if (it == j.end()) {
        fail(join(path, key), "missing required field");
    }
    return *it;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) {
        fail(path, "expected a number");
    }
    return v.get<double>();
}

double number_field(const json& j, std::string_view key, const std::string& path) {
    return number(require(j, key, path), join(path, key));
}

std::optional<double> optional_number(const json& j, std::string_view key, const std::string& path) {
    const auto it = j.find(std::string(key));
    if (it == j.end() || it->is_null()) {
        return std::nullopt;
    }
    return number(*it, join(path, key));
}

std::uint64_t unsigned_value(const json& v, const std::string& path) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        fail(path, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

bool bool_value(const json& v, const std::string& path) {
    if (!v.is_boolean()) {
        fail(path, "expected true or false");
    }
    return v.get<bool>();
}

ModelConfig parse_model(const json& j, const std::string& path) {
    check_object(j, path, {"regimes", "q_matrix", "history", "initial_regime"});
    ModelConfig m;

    const auto& regimes = require(j, "regimes", path);
    const std::string rpath = join(path, "regimes");
    if (!regimes.is_array() || regimes.empty()) {
        fail(rpath, "expected a non-empty array");
    }
    for (std::size_t i = 0; i < regimes.size(); ++i) {
        const auto& r = regimes[i];
        const std::string p = index(rpath, i);
        check_object(r, p, {"delta", "p", "tau", "a", "sigma"});
        m.regimes.push_back({.delta = number_field(r, "delta", p),
                             .p = number_field(r, "p", p),
                             .tau = number_field(r, "tau", p),
                             .a = number_field(r, "a", p),
                             .sigma = number_field(r, "sigma", p)});
    }

    const auto& q = require(j, "q_matrix", path);
    const std::string qpath = join(path, "q_matrix");
    if (!q.is_array()) {
        fail(qpath, "expected an array of rows");
    }
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (!q[i].is_array()) {
            fail(index(qpath, i), "expected an array of numbers");
        }
        std::vector<double> row;
        for (std::size_t k = 0; k < q[i].size(); ++k) {
            row.push_back(number(q[i][k], index(index(qpath, i), k)));
        }
        if (row.size() != q.size()) {
            fail(index(qpath, i), "row has " + std::to_string(row.size()) + " entries, expected " +
                                      std::to_string(q.size()));
        }
        m.q_matrix.push_back(std::move(row));
    }
    if (m.q_matrix.size() != m.regimes.size()) {
        fail(qpath, std::to_string(m.q_matrix.size()) + " rows for " + std::to_string(m.regimes.size()) +
                        " regimes");
    }

    const std::string hpath = join(path, "history");
    const auto hit = j.find("history");
    if (hit == j.end()) {
        m.history_constant = 1.0;
    } else {
        check_object(*hit, hpath, {"constant", "samples"});
        const bool has_c = hit->contains("constant");
        const bool has_s = hit->contains("samples");
        if (has_c == has_s) {
            fail(hpath, "give exactly one of \"constant\" or \"samples\"");
        }
        if (has_c) {
            m.history_constant = number((*hit)["constant"], join(hpath, "constant"));
        } else {
            const auto& s = (*hit)["samples"];
            const std::string spath = join(hpath, "samples");
            if (!s.is_array() || s.empty()) {
                fail(spath, "expected a non-empty array of [time, value] pairs");
            }
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (!s[i].is_array() || s[i].size() != 2) {
                    fail(index(spath, i), "expected a [time, value] pair");
                }
                m.history_samples.push_back(
                    {number(s[i][0], index(index(spath, i), 0)), number(s[i][1], index(index(spath, i), 1))});
            }
        }
    }

    if (const auto it = j.find("initial_regime"); it != j.end()) {
        m.initial_regime = unsigned_value(*it, join(path, "initial_regime"));
        if (m.initial_regime < 1 || m.initial_regime > m.regimes.size()) {
            fail(join(path, "initial_regime"), "must lie in 1.." + std::to_string(m.regimes.size()));
        }
    }
    return m;
}

SimulationConfig parse_simulation(const json& j, const std::string& path) {
    check_object(j, path,
                 {"dt", "t_max", "n_paths", "seed", "scheme", "theta", "alpha", "vartheta", "tail_window"});
    SimulationConfig s;
    if (j.contains("dt")) s.dt = number(j["dt"], join(path, "dt"));
    if (j.contains("t_max")) s.t_max = number(j["t_max"], join(path, "t_max"));
    if (j.contains("n_paths")) s.n_paths = unsigned_value(j["n_paths"], join(path, "n_paths"));
    if (j.contains("seed")) s.seed = unsigned_value(j["seed"], join(path, "seed"));
    if (j.contains("scheme")) {
        if (!j["scheme"].is_string()) {
            fail(join(path, "scheme"), "expected \"voc\" or \"em\"");
        }
        s.scheme = j["scheme"].get<std::string>();
    }
    if (j.contains("theta")) s.theta = number(j["theta"], join(path, "theta"));
    s.alpha = optional_number(j, "alpha", path);
    s.vartheta = optional_number(j, "vartheta", path);
    if (j.contains("tail_window")) s.tail_window = number(j["tail_window"], join(path, "tail_window"));

    if (!(s.dt > 0.0)) fail(join(path, "dt"), "must be > 0");
    if (!(s.t_max > 0.0)) fail(join(path, "t_max"), "must be > 0");
    if (s.dt > s.t_max) fail(join(path, "dt"), "must not exceed t_max");
    if (s.n_paths < 1) fail(join(path, "n_paths"), "must be >= 1");
    if (s.scheme != "voc" && s.scheme != "em") fail(join(path, "scheme"), "expected \"voc\" or \"em\"");
    if (!(s.tail_window > 0.0 && s.tail_window <= 1.0)) fail(join(path, "tail_window"), "must lie in (0, 1]");
    return s;
}

OutputConfig parse_output(const json& j, const std::string& path) {
    check_object(j, path, {"directory", "emit_paths", "emit_stats"});
    OutputConfig o;
    if (j.contains("directory")) {
        if (!j["directory"].is_string()) {
            fail(join(path, "directory"), "expected a string");
        }
        o.directory = j["directory"].get<std::string>();
    }
    if (j.contains("emit_paths")) o.emit_paths = bool_value(j["emit_paths"], join(path, "emit_paths"));
    if (j.contains("emit_stats")) o.emit_stats = bool_value(j["emit_stats"], join(path, "emit_stats"));
    return o;
}

FiguresConfig parse_figures(const json& j, const std::string& path) {
    check_object(j, path, {"t_max", "decay_model"});
    FiguresConfig f;
    f.t_max = optional_number(j, "t_max", path);
    if (f.t_max && !(*f.t_max > 0.0)) {
        fail(join(path, "t_max"), "must be > 0");
    }
    if (j.contains("decay_model")) {
        f.decay_model = parse_model(j["decay_model"], join(path, "decay_model"));
    }
    return f;
}

json model_to_json(const ModelConfig& m) {
    json j;
    j["regimes"] = json::array();
    for (const auto& r : m.regimes) {
        j["regimes"].push_back({{"delta", r.delta}, {"p", r.p}, {"tau", r.tau}, {"a", r.a}, {"sigma", r.sigma}});
    }
    j["q_matrix"] = m.q_matrix;
    if (m.history_constant) {
        j["history"] = {{"constant", *m.history_constant}};
    } else {
        json samples = json::array();
        for (const auto& s : m.history_samples) {
            samples.push_back({s.time, s.value});
        }
        j["history"] = {{"samples", samples}};
    }
    j["initial_regime"] = m.initial_regime;
    return j;
}

std::string line_col(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

RunConfig parse_config(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, line_col(text, e.byte) + ": " + e.what());
    }
    check_object(root, "", {"model", "simulation", "output", "figures"});
    RunConfig cfg;
    cfg.model = parse_model(require(root, "model", ""), "model");
    if (root.contains("simulation")) cfg.simulation = parse_simulation(root["simulation"], "simulation");
    if (root.contains("output")) cfg.output = parse_output(root["output"], "output");
    if (root.contains("figures")) cfg.figures = parse_figures(root["figures"], "figures");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::ConfigError, path + ": cannot open configuration file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, path + ": " + std::string(e.what()));
    }
}

std::string serialize_config(const RunConfig& cfg) {
    json root;
    root["model"] = model_to_json(cfg.model);
    const auto& s = cfg.simulation;
    json sim = {{"dt", s.dt},       {"t_max", s.t_max}, {"n_paths", s.n_paths},
                {"seed", s.seed},   {"scheme", s.scheme}, {"theta", s.theta},
                {"tail_window", s.tail_window}};
    if (s.alpha) sim["alpha"] = *s.alpha;
    if (s.vartheta) sim["vartheta"] = *s.vartheta;
    root["simulation"] = sim;
    root["output"] = {{"directory", cfg.output.directory},
                      {"emit_paths", cfg.output.emit_paths},
                      {"emit_stats", cfg.output.emit_stats}};
    if (cfg.figures) {
        json f = json::object();
        if (cfg.figures->t_max) f["t_max"] = *cfg.figures->t_max;
        if (cfg.figures->decay_model) f["decay_model"] = model_to_json(*cfg.figures->decay_model);
        root["figures"] = f;
    }
    return root.dump(2) + "\n";
}

ModelSpec to_model_spec(const ModelConfig& m) {
    ModelSpec spec;
    spec.regimes = m.regimes;
    spec.generator = GeneratorMatrix(m.q_matrix);
    double tau_max = 0.0;
    for (const auto& r : m.regimes) {
        tau_max = std::max(tau_max, r.tau);
    }
    spec.history = m.history_constant ? InitialHistory::constant(*m.history_constant, tau_max)
                                      : InitialHistory::from_samples(m.history_samples, tau_max);
    spec.initial_regime = m.initial_regime - 1;
    return spec;
}

ValidatedModel to_validated_model(const ModelConfig& m, bool require_irreducible) {
    return validate_model(to_model_spec(m), require_irreducible);
}

EnsembleConfig to_ensemble_config(const SimulationConfig& s) {
    EnsembleConfig e;
    e.n_paths = s.n_paths;
    e.dt = s.dt;
    e.horizon = s.t_max;
    e.seed = s.seed;
    e.scheme = parse_scheme(s.scheme);
    e.theta = s.theta;
    e.alpha = s.alpha;
    e.vartheta = s.vartheta;
    e.tail_window = s.tail_window;
    return e;
}

RunConfig reference_config() {
    RunConfig cfg;
    cfg.model.regimes = {{.delta = 2.0, .p = 4.0, .tau = 1.0, .a = 0.4, .sigma = 1.5},
                         {.delta = 1.0, .p = 2.0, .tau = 1.0, .a = 0.2, .sigma = 2.0},
                         {.delta = 4.0, .p = 8.0, .tau = 1.0, .a = 0.3, .sigma = 3.0}};
    cfg.model.q_matrix = {{-10.0, 4.0, 6.0}, {2.0, -3.0, 1.0}, {3.0, 5.0, -8.0}};
    cfg.model.history_constant = 1.0;
    cfg.model.initial_regime = 3;
    cfg.simulation = SimulationConfig{};
    cfg.simulation.seed = 20190101;
    FiguresConfig figures;
    figures.t_max = 1000.0;
    ModelConfig decay = cfg.model;
    decay.regimes = {{.delta = 2.0, .p = 0.2, .tau = 1.0, .a = 0.4, .sigma = 1.5},
                     {.delta = 1.0, .p = 0.2, .tau = 1.0, .a = 0.4, .sigma = 1.0},
                     {.delta = 4.0, .p = 0.4, .tau = 1.0, .a = 0.4, .sigma = 2.5}};
    figures.decay_model = decay;
    cfg.figures = figures;
    return cfg;
}

}  // namespace nbf::app

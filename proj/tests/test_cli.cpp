#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "nbf/app/commands.hpp"
#include "nbf/app/config.hpp"
#include "nbf/fixtures.hpp"
#include "nbf/format.hpp"
#include "support.hpp"

using namespace nbf;
using namespace nbf::app;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "model": {
    "regimes": [{"delta": 1, "p": 1, "tau": 0.5, "a": 1, "sigma": 0.5}],
    "q_matrix": [[0]]
  }
})";

std::string config_error(std::string_view text) {
    try {
        (void)parse_config(text);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConfigError);
        return e.what();
    }
    FAIL("expected a configuration error");
    return {};
}

RunConfig with_output(RunConfig cfg, const testing::TempDir& dir) {
    cfg.output.directory = dir.str();
    return cfg;
}

std::string shipped(const char* name) {
    return std::string(NBF_SOURCE_DIR) + "/configs/" + name;
}

}  // namespace

TEST_CASE("minimal document takes defaults") {
    const auto cfg = parse_config(kMinimal);
    CHECK(cfg.model.regimes.size() == 1);
    CHECK(cfg.model.history_constant == 1.0);
    CHECK(cfg.model.initial_regime == 1);
    CHECK(cfg.simulation.scheme == "voc");
    CHECK(cfg.simulation.theta == 1.0);
    CHECK_FALSE(cfg.simulation.alpha.has_value());
    CHECK(cfg.output.emit_stats);
    CHECK_FALSE(cfg.figures.has_value());
}

TEST_CASE("serialize then parse is the identity") {
    const auto ref = reference_config();
    CHECK(parse_config(serialize_config(ref)) == ref);

    auto cfg = parse_config(kMinimal);
    cfg.simulation.alpha = 0.123456789012345;
    cfg.simulation.vartheta = 2.5;
    cfg.model.history_constant.reset();
    cfg.model.history_samples = {{-0.5, 1.0}, {-0.1, 2.0 / 3.0}, {0.0, 0.7}};
    cfg.output.emit_paths = true;
    cfg.figures = FiguresConfig{.t_max = 12.5, .decay_model = std::nullopt};
    CHECK(parse_config(serialize_config(cfg)) == cfg);
}

TEST_CASE("shipped configurations parse and validate") {
    for (const char* name : {"three_regime.json", "three_regime_decay.json", "single_regime.json"}) {
        CAPTURE(name);
        const auto cfg = load_config(shipped(name));
        CHECK_NOTHROW((void)to_validated_model(cfg.model, true));
    }
    const auto ref = load_config(shipped("three_regime.json"));
    CHECK(fixtures::is_three_regime(to_model_spec(ref.model)));
    CHECK(ref.model == reference_config().model);
    CHECK(ref.simulation == reference_config().simulation);
    CHECK(ref.figures == reference_config().figures);
}

TEST_CASE("configuration maps onto the model and ensemble types") {
    const auto cfg = reference_config();
    const auto spec = to_model_spec(cfg.model);
    CHECK(spec.initial_regime == 2);
    CHECK(spec.history.tau_max() == 1.0);
    const auto ecfg = to_ensemble_config(cfg.simulation);
    CHECK(ecfg.n_paths == cfg.simulation.n_paths);
    CHECK(ecfg.horizon == cfg.simulation.t_max);
    CHECK(ecfg.scheme == Scheme::VariationOfConstants);
}

TEST_CASE("errors name the offending field") {
    CHECK(config_error(R"({"model": {"regimes": [{"delta": "x", "p": 1, "tau": 0, "a": 1, "sigma": 0}],
                                      "q_matrix": [[0]]}})")
              .find("model.regimes[0].delta") != std::string::npos);
    CHECK(config_error(R"({"model": {"regimes": [{"delta": 1, "p": 1, "tau": 0, "a": 1}], "q_matrix": [[0]]}})")
              .find("model.regimes[0].sigma") != std::string::npos);
    CHECK(config_error(R"({"model": {"regimes": [{"delta": 1, "p": 1, "tau": 0, "a": 1, "sigma": 0}],
                                      "q_matrix": [[0, 1]]}})")
              .find("model.q_matrix[0]") != std::string::npos);
    CHECK(config_error(R"({"modle": {}})").find("modle") != std::string::npos);
    CHECK(config_error(R"({"model": {"regimes": [{"delta": 1, "p": 1, "tau": 0, "a": 1, "sigma": 0}],
                                      "q_matrix": [[0]]}, "simulation": {"scheme": "rk4"}})")
              .find("simulation.scheme") != std::string::npos);
    CHECK(config_error(R"({"model": {"regimes": [{"delta": 1, "p": 1, "tau": 0, "a": 1, "sigma": 0}],
                                      "q_matrix": [[0]], "initial_regime": 2}})")
              .find("model.initial_regime") != std::string::npos);
}

TEST_CASE("step larger than the horizon is a configuration error") {
    const auto msg = config_error(R"({"model": {"regimes": [{"delta": 1, "p": 1, "tau": 0, "a": 1, "sigma": 0}],
                                      "q_matrix": [[0]]}, "simulation": {"dt": 2, "t_max": 1}})");
    CHECK(msg.find("simulation.dt") != std::string::npos);
    Overrides o;
    o.dt = 500.0;
    CHECK_THROWS_AS((void)apply_overrides(reference_config(), o), Error);
}

TEST_CASE("syntax errors carry line and column") {
    const auto msg = config_error("{\n  \"model\": {\n    \"regimes\": [1,,]\n  }\n}");
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("column") != std::string::npos);
}

TEST_CASE("model violations surface at validation time") {
    auto cfg = parse_config(kMinimal);
    cfg.model.regimes[0].delta = -1.0;
    CHECK_THROWS_AS((void)to_validated_model(cfg.model), ValidationError);
}

TEST_CASE("overrides") {
    Overrides o;
    o.out = "elsewhere";
    o.seed = 99;
    o.paths = 3;
    o.dt = 0.5;
    o.scheme = "em";
    const auto cfg = apply_overrides(reference_config(), o);
    CHECK(cfg.output.directory == "elsewhere");
    CHECK(cfg.simulation.seed == 99);
    CHECK(cfg.simulation.n_paths == 3);
    CHECK(cfg.simulation.dt == 0.5);
    CHECK(cfg.simulation.scheme == "em");
    Overrides bad;
    bad.paths = 0;
    CHECK_THROWS_AS((void)apply_overrides(reference_config(), bad), Error);
}

TEST_CASE("bounds command prints the table and the cross-check") {
    testing::TempDir dir("bounds");
    std::ostringstream console;
    CHECK(cmd_bounds(with_output(reference_config(), dir), console) == 0);
    const auto text = testing::read_file(dir.path() / "bounds.txt");
    CHECK(text == console.str().substr(0, text.size()));
    CHECK(text.find("1.1883317787478") != std::string::npos);
    CHECK(text.find("-4.197815533980") != std::string::npos);
    CHECK(text.find("7.733444756377") != std::string::npos);
    CHECK(text.find("4.81228649548") != std::string::npos);
    CHECK(text.find("DISAGREES") != std::string::npos);
}

TEST_CASE("bounds command for a single regime") {
    testing::TempDir dir("bounds1");
    std::ostringstream console;
    auto cfg = with_output(load_config(shipped("single_regime.json")), dir);
    CHECK(cmd_bounds(cfg, console) == 0);
    const auto text = testing::read_file(dir.path() / "bounds.txt");
    CHECK(text.find("\n1       1 ") != std::string::npos);
    CHECK(text.find("reference cross-check") == std::string::npos);
}

TEST_CASE("reducible chain is refused by the bounds command") {
    testing::TempDir dir("reducible");
    auto cfg = with_output(reference_config(), dir);
    cfg.model.q_matrix = {{-1.0, 1.0, 0.0}, {0.0, -1.0, 1.0}, {0.0, 0.0, 0.0}};
    std::ostringstream console;
    CHECK_THROWS_WITH_AS((void)cmd_bounds(cfg, console), doctest::Contains("Reducible"), Error);
    CHECK_FALSE(fs::exists(dir.path() / "bounds.txt"));
}

TEST_CASE("stationary command") {
    testing::TempDir dir("stationary");
    std::ostringstream console;
    CHECK(cmd_stationary(with_output(reference_config(), dir), console) == 0);
    const auto csv = testing::read_file(dir.path() / "stationary.csv");
    CHECK(csv.rfind("state,pi\n1,0.1844660194174", 0) == 0);

    auto sym = with_output(parse_config(kMinimal), dir);
    sym.model.regimes.push_back(sym.model.regimes[0]);
    sym.model.q_matrix = {{-1.0, 1.0}, {1.0, -1.0}};
    CHECK(cmd_stationary(sym, console) == 0);
    CHECK(testing::read_file(dir.path() / "stationary.csv") == "state,pi\n1,0.5\n2,0.5\n");

    CHECK(cmd_stationary(with_output(parse_config(kMinimal), dir), console) == 0);
    CHECK(testing::read_file(dir.path() / "stationary.csv") == "state,pi\n1,1\n");
}

TEST_CASE("simulate command is reproducible") {
    testing::TempDir a("sim_a");
    testing::TempDir b("sim_b");
    auto cfg = reference_config();
    cfg.simulation.t_max = 5.0;
    std::ostringstream console;
    CHECK(cmd_simulate(with_output(cfg, a), console) == 0);
    CHECK(cmd_simulate(with_output(cfg, b), console) == 0);
    CHECK(testing::first_line(a.path() / "trajectory.csv") == "time,x,regime");
    CHECK(testing::first_line(a.path() / "regime_path.csv") == "time,state");
    CHECK(testing::read_file(a.path() / "trajectory.csv") == testing::read_file(b.path() / "trajectory.csv"));
    CHECK(testing::read_file(a.path() / "regime_path.csv") == testing::read_file(b.path() / "regime_path.csv"));
}

TEST_CASE("without births a simulated path decays") {
    testing::TempDir dir("decay");
    auto cfg = reference_config();
    for (auto& r : cfg.model.regimes) {
        r.p = 0.0;
    }
    cfg.simulation.t_max = 10.0;
    cfg.simulation.dt = 1e-2;
    int decayed = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        cfg.simulation.seed = seed;
        std::ostringstream console;
        CHECK(cmd_simulate(with_output(cfg, dir), console) == 0);
        std::istringstream csv(testing::read_file(dir.path() / "trajectory.csv"));
        std::string line;
        std::string last;
        double x0 = NAN;
        while (std::getline(csv, line)) {
            if (line.rfind("0,", 0) == 0) {
                x0 = std::stod(line.substr(2, line.rfind(',') - 2));
            }
            last = line;
        }
        const auto first = last.find(',');
        const double xt = std::stod(last.substr(first + 1, last.rfind(',') - first - 1));
        decayed += xt < x0 ? 1 : 0;
    }
    CHECK(decayed >= 9);
}

TEST_CASE("ensemble and verify commands write their outputs") {
    testing::TempDir dir("ensemble");
    auto cfg = reference_config();
    cfg.simulation.t_max = 10.0;
    cfg.simulation.dt = 1e-2;
    cfg.simulation.n_paths = 16;
    cfg.output.emit_paths = true;
    std::ostringstream console;
    CHECK(cmd_ensemble(with_output(cfg, dir), console, 2) == 0);
    CHECK(testing::first_line(dir.path() / "stats.csv") ==
          "t,mean_x_theta,ci_half,time_avg,lyap_min,lyap_mean,lyap_max,runmin_mean");
    CHECK(testing::first_line(dir.path() / "paths.csv") == "path,x_T,lyap_T,runmin_T");
    const auto report = testing::read_file(dir.path() / "report.txt");
    CHECK(report.find("liminf_nstar") != std::string::npos);
    CHECK(report.find("DISAGREES") != std::string::npos);
    const auto kv = testing::read_file(dir.path() / "report.kv");
    CHECK(kv.find("check.positivity.verdict=consistent") != std::string::npos);
    for (const auto& entry : fs::directory_iterator(dir.path())) {
        CHECK(entry.path().extension() != ".tmp");
    }

    std::ostringstream strict;
    CHECK(cmd_verify(with_output(cfg, dir), strict, 1) == 0);
}

TEST_CASE("verify exits 2 on a reducible chain") {
    testing::TempDir dir("verify_red");
    auto cfg = reference_config();
    cfg.model.q_matrix = {{-1.0, 1.0, 0.0}, {0.0, -1.0, 1.0}, {0.0, 0.0, 0.0}};
    cfg.simulation.t_max = 2.0;
    cfg.simulation.dt = 1e-2;
    cfg.simulation.n_paths = 4;
    std::ostringstream console;
    CHECK(cmd_verify(with_output(cfg, dir), console) == 2);
    CHECK(cmd_ensemble(with_output(cfg, dir), console) == 0);
}

TEST_CASE("figures command emits the three figure tables") {
    testing::TempDir dir("figures");
    auto cfg = reference_config();
    cfg.figures->t_max = 20.0;
    cfg.simulation.dt = 1e-3;
    std::ostringstream console;
    CHECK(cmd_figures(with_output(cfg, dir), console) == 0);
    CHECK(testing::first_line(dir.path() / "figure_path.csv") == "t,x,regime");
    CHECK(testing::first_line(dir.path() / "figure_lyapunov.csv") == "t,log_x_over_t");
    CHECK(testing::first_line(dir.path() / "figure_decay.csv") == "t,x");

    std::istringstream path(testing::read_file(dir.path() / "figure_path.csv"));
    std::string line;
    std::size_t rows = 0;
    std::string last;
    while (std::getline(path, line)) {
        ++rows;
        last = line;
    }
    CHECK(rows - 1 <= 10001);
    CHECK(last.rfind("20,", 0) == 0);

    // the decaying scenario ends with a negative growth rate
    std::istringstream decay(testing::read_file(dir.path() / "figure_decay.csv"));
    while (std::getline(decay, line)) {
        last = line;
    }
    CHECK(std::log(std::stod(last.substr(last.find(',') + 1))) / 20.0 < 0.0);
}

TEST_CASE("atomic writes leave no temporary file") {
    testing::TempDir dir("atomic");
    write_file_atomic(dir.path() / "sub" / "a.txt", "hello");
    CHECK(testing::read_file(dir.path() / "sub" / "a.txt") == "hello");
    CHECK_FALSE(fs::exists(dir.path() / "sub" / "a.txt.tmp"));
}

TEST_CASE("round-trip number formatting") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(format_double(NAN) == "nan");
    CHECK(format_double(INFINITY) == "inf");
    CHECK(format_double(-INFINITY) == "-inf");
}

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nbf/ensemble.hpp"
#include "nbf/model.hpp"

namespace nbf::app {

/// Model block of the configuration document, kept as written (1-based regime).
struct ModelConfig {
    std::vector<RegimeParams> regimes;
    std::vector<std::vector<double>> q_matrix;
    std::optional<double> history_constant;
    std::vector<HistorySample> history_samples;  ///< used when history_constant is empty
    std::size_t initial_regime = 1;

    bool operator==(const ModelConfig&) const = default;
};

struct SimulationConfig {
    double dt = 1e-3;
    double t_max = 200.0;
    std::size_t n_paths = 256;
    std::uint64_t seed = 1;
    std::string scheme = "voc";
    double theta = 1.0;
    std::optional<double> alpha;
    std::optional<double> vartheta;
    double tail_window = 0.2;

    bool operator==(const SimulationConfig&) const = default;
};

struct OutputConfig {
    std::string directory = "out";
    bool emit_paths = false;
    bool emit_stats = true;

    bool operator==(const OutputConfig&) const = default;
};

/// Optional figure-data block: a horizon for the figure runs and a second model
/// whose path is written as the decay series.
struct FiguresConfig {
    std::optional<double> t_max;
    std::optional<ModelConfig> decay_model;

    bool operator==(const FiguresConfig&) const = default;
};

struct RunConfig {
    ModelConfig model;
    SimulationConfig simulation;
    OutputConfig output;
    std::optional<FiguresConfig> figures;

    bool operator==(const RunConfig&) const = default;
};

/// Parses a JSON document. Errors are ConfigError naming the field path
/// (e.g. "model.regimes[2].delta") or the line and column of a syntax error.
[[nodiscard]] RunConfig parse_config(std::string_view text);
[[nodiscard]] RunConfig load_config(const std::string& path);
[[nodiscard]] std::string serialize_config(const RunConfig& cfg);

[[nodiscard]] ModelSpec to_model_spec(const ModelConfig& model);
[[nodiscard]] ValidatedModel to_validated_model(const ModelConfig& model, bool require_irreducible = false);
[[nodiscard]] EnsembleConfig to_ensemble_config(const SimulationConfig& sim);

/// The three-regime reference configuration shipped in configs/.
[[nodiscard]] RunConfig reference_config();

}  // namespace nbf::app

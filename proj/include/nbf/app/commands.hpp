#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "nbf/app/config.hpp"

namespace nbf::app {

/// Command-line overrides applied on top of a RunConfig.
struct Overrides {
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<double> dt;
    std::optional<std::string> scheme;
    std::size_t workers = 0;
};

[[nodiscard]] RunConfig apply_overrides(RunConfig cfg, const Overrides& o);

/// Each command writes its files into cfg.output.directory and a human-readable
/// summary to `console`. The return value is the process exit code.
int cmd_bounds(const RunConfig& cfg, std::ostream& console);
int cmd_stationary(const RunConfig& cfg, std::ostream& console);
int cmd_simulate(const RunConfig& cfg, std::ostream& console);
int cmd_ensemble(const RunConfig& cfg, std::ostream& console, std::size_t workers = 0);
/// Like cmd_ensemble but returns 1 when any bound verdict is "violated".
int cmd_verify(const RunConfig& cfg, std::ostream& console, std::size_t workers = 0);
int cmd_figures(const RunConfig& cfg, std::ostream& console);

}  // namespace nbf::app

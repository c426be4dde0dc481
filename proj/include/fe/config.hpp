// Declarative run configuration: JSON schema -> validated RunConfig.
#pragma once

#include <cstdint>
#include <string>

#include "fe/density.hpp"
#include "fe/models.hpp"
#include "fe/rmt.hpp"
#include "fe/subordination.hpp"

namespace fe {

// Bad config file: parse errors carry line/column, semantic errors carry the
// offending field path. The CLI maps this to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    OperatorModel x_model;
    OperatorModel y_model;
    GridSpec grid;
    IterationConfig iteration;
    int sim_size = 500;
    int sim_trials = 100;
    std::uint64_t sim_seed = 1;
    int sim_bins = 200;
    int unwrap_k = 1;
    std::string output_dir = "out";

    SimulationSpec simulation() const;
};

// Parses and fully validates a config document. Throws ConfigError with a
// position (parse) or a field path (semantics). Pair validation errors are
// fatal here; warnings are returned for the caller to surface.
RunConfig parse_config(const std::string& text, std::vector<std::string>* warnings = nullptr);

// FNV-1a over the raw config bytes, hex-encoded; recorded in .meta sidecars.
std::string config_hash(const std::string& text);

}  // namespace fe

#pragma once

#include <stdexcept>
#include <string>

namespace mtadapt {

/// Operand shapes do not conform for an operation.
struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition.
struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value (bad rank, infeasible budget, schema violation).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Stream count does not match the task-group structure.
struct RoutingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Problem size exceeds what an exact method can handle.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A required on-disk artifact is missing; carries the path looked for.
struct MissingArtifactError : std::runtime_error {
    explicit MissingArtifactError(const std::string& path)
        : std::runtime_error("missing artifact: " + path), missing_path(path) {}
    std::string missing_path;
};

}  // namespace mtadapt

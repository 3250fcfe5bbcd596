#pragma once

#include <stdexcept>
#include <string>

namespace qclock {

/// Malformed or inconsistent experiment configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite amplitudes or a run that cannot be trusted numerically.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Probability reached the hard-wall edges of the domain.
struct BoundaryContamination : NumericalError {
    BoundaryContamination(const std::string& what, double norm_at_edges = 0.0, double at_time = 0.0)
        : NumericalError(what), boundary_norm(norm_at_edges), time(at_time)
    {
    }
    double boundary_norm;
    double time;
};

/// Conditional observables requested on a region with no amplitude.
struct NoTransmission : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qclock

#pragma once

#include <stdexcept>
#include <string>

namespace gtms {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    DimensionMismatch(const std::string& field, long expected, long got)
        : Error("dimension mismatch in '" + field + "': expected " + std::to_string(expected) +
                ", got " + std::to_string(got)) {}
};

struct OpenBoundaryViolation : Error {
    OpenBoundaryViolation() : Error("open boundary requires the wrap-around hidden-deep couplings of the last block to vanish") {}
};

struct ShapeMismatch : Error {
    using Error::Error;
};

struct LengthMismatch : Error {
    LengthMismatch(long expected, long got)
        : Error("flat parameter vector length mismatch: expected " + std::to_string(expected) +
                ", got " + std::to_string(got)) {}
};

struct NonFinite : Error {
    using Error::Error;
};

struct ZeroDenominator : Error {
    ZeroDenominator() : Error("amplitude ratio with zero denominator") {}
};

struct AmplitudeTooSmall : Error {
    explicit AmplitudeTooSmall(double floor)
        : Error("amplitude magnitude below floor " + std::to_string(floor)) {}
};

struct NoValidStart : Error {
    NoValidStart() : Error("could not find a start configuration with nonzero amplitude") {}
};

struct NegativeMean : Error {
    explicit NegativeMean(double value)
        : Error("swap estimator mean is not positive: " + std::to_string(value)) {}
};

struct InsufficientSamples : Error {
    InsufficientSamples() : Error("need at least two samples") {}
};

struct SingularSystem : Error {
    SingularSystem() : Error("metric solve failed on both the direct and pseudo-inverse paths") {}
};

struct TooLarge : Error {
    using Error::Error;
};

struct ZeroState : Error {
    ZeroState() : Error("state vector has zero norm") {}
};

struct NoConvergence : Error {
    using Error::Error;
};

struct Diverged : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace gtms

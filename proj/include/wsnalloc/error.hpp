#pragma once

#include <stdexcept>
#include <string>

namespace wsnalloc {

enum class ErrorCode {
    InvalidArgument,
    DegenerateSensor,
    AllChannelsSilent,
    Infeasible,
    BracketFailure,
    NonMonotoneCoupling,
    BOutOfRange,
    EmptyCell,
    TooFewTrainingVectors,
    DimensionMismatch,
    Parse,
    Io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Raised when sigma_theta2 / D0 cannot be reached by any allocation.
// min_variance is sigma_theta2 / sum(beta), the variance with every sensor
// transmitting at unbounded power.
class InfeasibleError : public Error {
public:
    InfeasibleError(double min_variance, const std::string& what)
        : Error(ErrorCode::Infeasible, what), min_variance_(min_variance) {}

    double min_variance() const noexcept { return min_variance_; }

private:
    double min_variance_;
};

}  // namespace wsnalloc

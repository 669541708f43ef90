#ifndef ACSBAYES_ERRORS_HPP
#define ACSBAYES_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace acsbayes {

// Spatial growth of a hypothesised network dead-ended past its retry budget.
struct AllocationFailure : std::runtime_error {
    int network_size;
    explicit AllocationFailure(int size, const std::string& what)
        : std::runtime_error(what), network_size(size) {}
};

// The available selection weight reached zero before the requested number of
// draws could be completed.
struct SamplingExhausted : std::runtime_error {
    int draws_completed;
    SamplingExhausted(int completed, const std::string& what)
        : std::runtime_error(what), draws_completed(completed) {}
};

struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ChainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace acsbayes

#endif

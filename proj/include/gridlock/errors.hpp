#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gridlock {

/// Invalid configuration, scenario, or gain set.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A state or output became non-finite during simulation.
class DivergenceError : public std::runtime_error {
public:
    static constexpr std::size_t kUnknownSample = static_cast<std::size_t>(-1);

    explicit DivergenceError(const std::string& what, std::size_t sample_index = kUnknownSample)
        : std::runtime_error(what), sample_index_(sample_index) {}

    std::size_t sample_index() const { return sample_index_; }

private:
    std::size_t sample_index_;
};

} // namespace gridlock

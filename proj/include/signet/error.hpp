#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace signet {

// Pipeline error with a coarse category used for process exit codes:
// usage -> 1, data -> 2, numeric -> 3.
class Error : public std::runtime_error {
public:
    enum class Kind { usage, data, numeric };

    Error(Kind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    Kind kind() const { return kind_; }

    static Error usage(std::string message) { return Error(Kind::usage, std::move(message)); }
    static Error data(std::string message) { return Error(Kind::data, std::move(message)); }
    static Error numeric(std::string message) { return Error(Kind::numeric, std::move(message)); }

private:
    Kind kind_;
};

}  // namespace signet

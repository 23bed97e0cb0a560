#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace taskmap {

// Input or invariant violation detected by one of the modules. The module
// tag ends up in CLI error lines as "error: <module>: <message>".
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string module, const std::string& message)
        : std::runtime_error(module + ": " + message), module_(std::move(module)) {}

    const std::string& module() const { return module_; }

private:
    std::string module_;
};

} // namespace taskmap

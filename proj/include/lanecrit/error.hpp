#pragma once

#include <stdexcept>
#include <string>

namespace lanecrit {

/// Raised for violated preconditions and malformed inputs across all modules.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lanecrit

#pragma once

#include <stdexcept>
#include <string>

namespace zocr {

// Single exception type for data, format and precondition failures.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace zocr

#pragma once

#include <stdexcept>
#include <string>

namespace swarm {

// Common base so callers can catch any domain error with one handler.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace swarm

#pragma once

#include <stdexcept>
#include <string>

namespace mmspc {

/// Invalid or inconsistent scenario configuration.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Linear system without a unique solution.
class SingularMatrixError : public std::runtime_error {
public:
    explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

/// No admissible state realizes the demanded level.
class SchedulerDeadEnd : public std::runtime_error {
public:
    explicit SchedulerDeadEnd(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mmspc

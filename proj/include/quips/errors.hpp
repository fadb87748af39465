#pragma once

#include <stdexcept>
#include <string>

namespace quips {

struct AvoidanceExhausted : std::runtime_error {
    explicit AvoidanceExhausted(const std::string& what) : std::runtime_error(what) {}
};

struct SingularEvaluation : std::runtime_error {
    explicit SingularEvaluation(const std::string& what) : std::runtime_error(what) {}
};

struct DegeneratePoint : std::runtime_error {
    explicit DegeneratePoint(const std::string& what) : std::runtime_error(what) {}
};

struct PathNotClosed : std::runtime_error {
    explicit PathNotClosed(const std::string& what) : std::runtime_error(what) {}
};

struct BadParams : std::runtime_error {
    explicit BadParams(const std::string& what) : std::runtime_error(what) {}
};

struct UnknownArrow : std::runtime_error {
    explicit UnknownArrow(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::runtime_error {
    explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct DegreeMismatch : std::runtime_error {
    explicit DegreeMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct StepRejected : std::runtime_error {
    explicit StepRejected(const std::string& what) : std::runtime_error(what) {}
};

} // namespace quips

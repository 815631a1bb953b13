#pragma once

#include <stdexcept>
#include <string>

namespace rowlegal {

/** Input violates a structural invariant (bad widths, non-convex cost, malformed file). */
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/** Instance (or requested window/tuple) admits no feasible placement. */
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

/** An operation was asked to evaluate or act outside its domain. */
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

/** A reference solver refused an instance above its size limits. */
class OracleLimitError : public std::runtime_error {
public:
    explicit OracleLimitError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace rowlegal

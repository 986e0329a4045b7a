#ifndef ORBITSET_ERRORS_HPP
#define ORBITSET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace orbitset {

/// Thrown when a caller violates an operation's precondition
/// (dimension mismatch, space mismatch, non-invertible map, ...).
class contract_violation : public std::invalid_argument {
public:
    explicit contract_violation(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when a computation would exceed a configured cardinality cap
/// (grid too fine, orbit set too large, word count too large).
class size_limit_error : public std::runtime_error {
public:
    explicit size_limit_error(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when an internal invariant fails at runtime; indicates a bug,
/// not a user error.
class internal_error : public std::logic_error {
public:
    explicit internal_error(const std::string& what) : std::logic_error(what) {}
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond)
        throw contract_violation(msg);
}

inline void check_internal(bool cond, const std::string& msg) {
    if (!cond)
        throw internal_error(msg);
}

} // namespace detail
} // namespace orbitset

#endif

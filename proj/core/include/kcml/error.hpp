#ifndef KCML_ERROR_HPP
#define KCML_ERROR_HPP

#include <stdexcept>
#include <string>

namespace kcml {

/// Base of every failure the library reports.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Caller passed an argument outside an operation's contract.
class argument_error : public error {
public:
    using error::error;
};

/// Malformed input file; messages carry the file and offending line.
class parse_error : public error {
public:
    using error::error;
};

/// Constraint set cannot be built from the given dataset.
class constraint_error : public error {
public:
    using error::error;
};

/// A training problem with only one label value.
class degenerate_labels_error : public error {
public:
    using error::error;
};

/// Non-finite values or a numerical routine that failed to converge.
class numeric_error : public error {
public:
    using error::error;
};

} // namespace kcml

#endif

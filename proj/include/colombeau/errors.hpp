#pragma once

#include <stdexcept>
#include <string>

namespace colombeau {

/// Parse failure with the byte offset of the offending token.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string msg, std::size_t position)
        : std::runtime_error(std::move(msg)), position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

/// Evaluation failure (domain error or undeclared symbol), never a silent NaN.
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A generalized number failed the strictly-nonzero test.
class NotInvertibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A map is not compactly bounded on the requested boxes.
class CBoundednessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical integration could not continue (non-finite state or field failure).
class IntegratorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scenario/config file violates the documented schema.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace colombeau

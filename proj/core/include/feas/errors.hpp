#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace feas {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RankDeficient : public Error {
public:
    explicit RankDeficient(std::size_t column)
        : Error("rank deficient at column " + std::to_string(column)), column_(column) {}
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class NonFinite : public Error {
public:
    using Error::Error;
};

class ZeroConstraint : public Error {
public:
    explicit ZeroConstraint(std::size_t index)
        : Error("constraint " + std::to_string(index) + " has a = 0 and b = 0"), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class AtInfinity : public Error {
public:
    using Error::Error;
};

class AffinelyDependent : public Error {
public:
    using Error::Error;
};

class PreconditionViolated : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class NumericalBreakdown : public Error {
public:
    NumericalBreakdown(std::size_t iteration, const std::string& what)
        : Error("numerical breakdown at iteration " + std::to_string(iteration) + ": " + what),
          iteration_(iteration) {}
    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

class DegenerateRatioTest : public Error {
public:
    using Error::Error;
};

class TriggerNotMet : public Error {
public:
    using Error::Error;
};

class Unsolvable : public Error {
public:
    using Error::Error;
};

class EmptyReduction : public Error {
public:
    using Error::Error;
};

class DimensionTooSmall : public Error {
public:
    using Error::Error;
};

class TooLarge : public Error {
public:
    using Error::Error;
};

class Cycling : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& reason)
        : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class VersionMismatch : public Error {
public:
    using Error::Error;
};

class NonPositiveData : public Error {
public:
    using Error::Error;
};

} // namespace feas

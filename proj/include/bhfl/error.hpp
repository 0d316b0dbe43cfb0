#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace bhfl {

enum class ErrorKind {
    EmptyInput,
    DimensionMismatch,
    InvalidConfig,
    TooFewVectors,
    IndivisibleSplit,
    ParseError,
    MissingColumn,
    NonFiniteState,
    ConfigError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Base error for everything the library throws on a contract violation.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised by the config parser; carries the offending field path
/// (e.g. "system.alpha").
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& reason)
        : Error(ErrorKind::ConfigError, field + ": " + reason),
          field_(std::move(field)), reason_(reason) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }
    [[nodiscard]] const std::string& reason() const noexcept { return reason_; }

private:
    std::string field_;
    std::string reason_;
};

/// CSV parse failure; row is 1-based counting the header as row 1.
class ParseError : public Error {
public:
    ParseError(std::size_t row, std::string column, const std::string& reason)
        : Error(ErrorKind::ParseError,
                "row " + std::to_string(row) + ", column '" + column + "': " + reason),
          row_(row), column_(std::move(column)) {}

    [[nodiscard]] std::size_t row() const noexcept { return row_; }
    [[nodiscard]] const std::string& column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

inline void require(bool condition, ErrorKind kind, const std::string& what) {
    if (!condition) throw Error(kind, what);
}

}  // namespace bhfl

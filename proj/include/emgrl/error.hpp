#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace emgrl {

/// Shape disagreement between two operands. Carries both sizes.
class DimensionError : public std::invalid_argument {
public:
    DimensionError(const std::string& context, std::size_t expected, std::size_t actual)
        : std::invalid_argument(context + ": dimension mismatch (expected " +
                                std::to_string(expected) + ", got " + std::to_string(actual) + ")"),
          expected_(expected), actual_(actual) {}

    std::size_t expected() const noexcept { return expected_; }
    std::size_t actual() const noexcept { return actual_; }

private:
    std::size_t expected_;
    std::size_t actual_;
};

/// Input shorter than an operation requires.
class LengthError : public std::invalid_argument {
public:
    LengthError(const std::string& context, std::size_t required, std::size_t actual)
        : std::invalid_argument(context + ": input too short (requires at least " +
                                std::to_string(required) + ", got " + std::to_string(actual) + ")"),
          required_(required), actual_(actual) {}

    std::size_t required() const noexcept { return required_; }
    std::size_t actual() const noexcept { return actual_; }

private:
    std::size_t required_;
    std::size_t actual_;
};

/// Malformed input file. `line` is 1-based and counts the header line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& message)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + message),
          source_(source), line_(line) {}

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

/// Invalid configuration value; `field` is the dotted key path.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(field) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace emgrl

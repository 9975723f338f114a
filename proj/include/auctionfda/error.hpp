#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace auctionfda {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file content. Carries the source name and 1-based line.
class ParseError : public Error {
public:
    ParseError(std::string source, std::size_t line, const std::string& message);

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

/// A value violates a documented domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// The penalized normal equations could not be factorized.
class SingularSystemError : public Error {
public:
    using Error::Error;
};

/// A regression is not estimable: too few lots or collinear design columns.
class EstimabilityError : public Error {
public:
    EstimabilityError(const std::string& message, std::vector<std::string> collinear_columns = {},
                      std::optional<std::size_t> t_index = std::nullopt);

    const std::vector<std::string>& collinear_columns() const noexcept { return collinear_; }
    std::optional<std::size_t> t_index() const noexcept { return t_index_; }

private:
    std::vector<std::string> collinear_;
    std::optional<std::size_t> t_index_;
};

}  // namespace auctionfda

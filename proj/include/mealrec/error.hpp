#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mealrec {

// Base for every error the library throws. The subclasses map onto the
// CLI exit-code classes: IoError/ConfigError -> 2, the rest -> 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Syntactically malformed document.
class ParseError : public Error {
public:
    using Error::Error;
};

// Document parsed but broke one or more invariants.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> violations);
    ValidationError(std::string summary, std::vector<std::string> violations);

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

// Request is well-formed but cannot be served (bad horizon, no recipe for a role...).
class DomainError : public Error {
public:
    using Error::Error;
};

}  // namespace mealrec

#pragma once

#include <stdexcept>
#include <string>

namespace rehab {

enum class ErrorKind {
    parse,          // malformed document
    validation,     // well-formed but violates an invariant
    indeterminate,  // pipeline could not produce an answer
    not_found,
    conflict,
    io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace rehab

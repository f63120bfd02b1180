#pragma once

#include <stdexcept>
#include <string>

namespace hplate {

// Failure classes surfaced by the library. The CLI maps each to an exit code.
enum class ErrorKind {
    InvalidArgument,
    Io,
    NoPlate,
    NoFood,
    BadDataset,
    BadModel,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

const char* to_string(ErrorKind kind) noexcept;

} // namespace hplate

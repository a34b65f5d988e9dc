#pragma once

#include <stdexcept>
#include <string>

namespace afp {

// Error hierarchy shared by the whole library. Callers that only care
// whether something went wrong can catch afp::Error.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input violates an operation's precondition (bad shape, silent signal, ...).
struct InvalidInput : Error {
    explicit InvalidInput(const std::string& msg) : Error(msg) {}
};

// A value falls outside a documented range (quantizer field, filter cutoff).
struct RangeError : Error {
    explicit RangeError(const std::string& msg) : Error(msg) {}
};

// On-disk data is malformed (bad magic, truncation, CRC mismatch, shape).
struct FormatError : Error {
    explicit FormatError(const std::string& msg) : Error(msg) {}
};

// A configuration is incomplete or inconsistent (missing corpus, bad spec).
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// A keyed lookup found nothing.
struct LookupError : Error {
    explicit LookupError(const std::string& msg) : Error(msg) {}
};

// An insert collided with existing state (duplicate track id).
struct ConflictError : Error {
    explicit ConflictError(const std::string& msg) : Error(msg) {}
};

}  // namespace afp

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace parkcast {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: bad header, bad GeoJSON, out-of-range coordinates, ...
class InputError : public Error {
public:
    using Error::Error;
};

/// A violated precondition of an operation (empty input, k too large, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A referenced artifact or id does not exist.
class NotFoundError : public Error {
public:
    using Error::Error;
};

}  // namespace parkcast

#pragma once

#include <stdexcept>
#include <string>

namespace deepwsd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor or image shapes do not agree with what an operation requires.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A kernel or layer configuration the inference core does not implement.
class UnsupportedShapeError : public Error {
public:
    using Error::Error;
};

/// A binary file does not follow its container format (magic, truncation).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Stored checksum does not match the payload.
class CorruptionError : public Error {
public:
    using Error::Error;
};

/// Weight archive is well formed but lacks a tensor or has the wrong shape.
class SchemaError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Statistics on constant or fully tied data are undefined.
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace deepwsd

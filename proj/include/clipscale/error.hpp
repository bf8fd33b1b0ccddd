#pragma once

#include <stdexcept>
#include <string>

namespace clipscale {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text (CSV, JSON, matrix or image files).
class ParseError : public Error {
public:
    using Error::Error;
};

// A value outside its documented range.
class RangeError : public Error {
public:
    using Error::Error;
};

// A name or index that is not present where it must be.
class LookupError : public Error {
public:
    using Error::Error;
};

// Input that leaves the computation underdetermined.
class DegeneracyError : public Error {
public:
    using Error::Error;
};

// Argument outside the mathematical domain of an operation (log of 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class LayoutError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class DivergenceError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

[[noreturn]] void throw_io(const std::string& what, const std::string& path);

}  // namespace clipscale

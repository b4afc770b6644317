#pragma once

#include <stdexcept>
#include <string>

namespace zkmfa {

/// Base of every exception raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameters : public Error {
public:
    using Error::Error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Malformed bytes or files (bad magic, reserved codes, wrong sizes, schema violations).
class FormatError : public Error {
public:
    using Error::Error;
};

class NotFound : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ProtocolStateError : public Error {
public:
    using Error::Error;
};

class InsufficientStableBits : public Error {
public:
    InsufficientStableBits(std::size_t collected, std::size_t required)
        : Error("insufficient stable bits: collected " + std::to_string(collected) + ", need " +
                std::to_string(required)),
          collected_(collected),
          required_(required) {}

    std::size_t collected() const noexcept { return collected_; }
    std::size_t required() const noexcept { return required_; }

private:
    std::size_t collected_;
    std::size_t required_;
};

class InsufficientChallenges : public Error {
public:
    using Error::Error;
};

/// A statistic whose denominator is empty (e.g. match fraction against an all-X table).
class UndefinedStatistic : public Error {
public:
    using Error::Error;
};

class TransportError : public Error {
public:
    using Error::Error;
};

}  // namespace zkmfa

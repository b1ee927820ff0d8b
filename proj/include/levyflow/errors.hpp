#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace levyflow {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A jump mark a with det(I + a) = 0.
class SingularJump : public Error {
public:
    using Error::Error;
};

class UnknownName : public Error {
public:
    using Error::Error;
};

class InvalidStep : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class HasGaussianPart : public Error {
public:
    using Error::Error;
};

/// A product factor of the Emery scheme is (numerically) singular.
class SingularFactor : public Error {
public:
    SingularFactor(const std::string& what, std::size_t cell) : Error(what), cell_(cell) {}
    std::size_t cell() const noexcept { return cell_; }

private:
    std::size_t cell_;
};

class SingularState : public Error {
public:
    using Error::Error;
};

class DegenerateNorm : public Error {
public:
    using Error::Error;
};

class RequiresInvariantMeasure : public Error {
public:
    using Error::Error;
};

class InconsistentDerivatives : public Error {
public:
    using Error::Error;
};

/// Missing or mistyped configuration key; `key()` is the dotted path.
class ConfigError : public Error {
public:
    ConfigError(const std::string& key, const std::string& what)
        : Error("config key '" + key + "': " + what), key_(key) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class MixedKinds : public Error {
public:
    using Error::Error;
};

}  // namespace levyflow

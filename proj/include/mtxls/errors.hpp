#pragma once

#include <stdexcept>
#include <string>

namespace mtxls {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or contract-violating inputs (dimension mismatches, bad
// permutations, invalid records).
class InvalidInputError : public Error {
public:
    explicit InvalidInputError(const std::string& what) : Error(what) {}
};

// A configured budget would be exceeded (e.g. exhaustive search space).
class CapacityError : public Error {
public:
    explicit CapacityError(const std::string& what) : Error(what) {}
};

// A remote provider returned a non-success status or could not be reached.
class ProviderError : public Error {
public:
    ProviderError(const std::string& what, int status = 0)
        : Error(what), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

// The provider answered, but the payload violates the wire contract
// (wrong dimension, wrong count, score outside the declared range).
class ProtocolError : public Error {
public:
    explicit ProtocolError(const std::string& what) : Error(what) {}
};

}  // namespace mtxls

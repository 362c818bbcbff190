#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nsis {

// Bad argument to a public operation (out-of-range vertex, size mismatch, ...).
class input_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Edge-list text that does not conform to the file format.
class parse_error : public std::runtime_error {
public:
    parse_error(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Model parameters that cannot define a chain (e.g. p* >= 1).
class config_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A formula evaluated outside its domain (e.g. gamma <= 0 in the upper bound).
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A requested computation exceeds a documented size cap.
class resource_error : public std::length_error {
public:
    using std::length_error::length_error;
};

class numerical_error : public std::runtime_error {
public:
    numerical_error(const std::string& what, double residual);
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// An operation was called outside the regime it is defined for.
class precondition_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class generation_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace nsis

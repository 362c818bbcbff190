#include "nsis/errors.hpp"

namespace nsis {

parse_error::parse_error(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line)
{}

numerical_error::numerical_error(const std::string& what, double residual)
    : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
      residual_(residual)
{}

} // namespace nsis

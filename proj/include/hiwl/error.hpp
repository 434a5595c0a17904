#pragma once

#include <stdexcept>
#include <string>

namespace hiwl {

/// Violated precondition on an argument (bad order, bad parameter range, ...).
class domain_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not reach its accuracy target.
class convergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file or failed integrity check.
class format_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File system failure.
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hiwl

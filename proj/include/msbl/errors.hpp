#pragma once

#include <stdexcept>
#include <string>

namespace msbl {

// Thrown when an exhaustive routine (spark, RIC, ...) would exceed its
// configured enumeration budget.
class capacity_error : public std::runtime_error {
public:
    explicit capacity_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an iterative solver produces non-finite values.
class numerical_error : public std::runtime_error {
public:
    numerical_error(const std::string& what, long iteration = -1)
        : std::runtime_error(what), iteration_(iteration) {}

    long iteration() const noexcept { return iteration_; }

private:
    long iteration_;
};

}  // namespace msbl

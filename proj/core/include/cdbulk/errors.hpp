#pragma once

#include <stdexcept>
#include <string>

namespace cdbulk {

/// Real evaluation point lies outside the bulk interval (-2, 2).
class OutsideBulkError : public std::domain_error {
public:
    explicit OutsideBulkError(const std::string& what) : std::domain_error(what) {}
};

/// Recurrence values blew past the overflow guard (point far outside the bulk).
class EscapedBulkError : public std::runtime_error {
public:
    explicit EscapedBulkError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerically certified bound failed its validation sweep.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cdbulk

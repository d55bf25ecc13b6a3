#pragma once

#include <stdexcept>
#include <string>

namespace sip {

// Exceptions are partitioned by the process exit code the CLI maps them to.
// Library code throws; tools/sipcal.cpp catches at the top level and converts
// the code() into the process exit status.

class error : public std::runtime_error {
public:
  error(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const noexcept { return code_; }

private:
  int code_;
};

// Invalid configuration: bad JSON schema, unknown keys, out-of-range settings,
// degenerate priors, malformed bounds. Exit code 2.
class config_error : public error {
public:
  explicit config_error(const std::string& what) : error(2, what) {}
};

// Invalid input data: unreadable files, parse failures, empty data sets,
// shape mismatches between files and configuration. Exit code 3.
class data_error : public error {
public:
  explicit data_error(const std::string& what) : error(3, what) {}
};

// The prior sample failed to populate cells carrying observable-data mass
// beyond the tolerated threshold; results would be silently biased. Exit 4.
class under_resolved_error : public error {
public:
  explicit under_resolved_error(const std::string& what) : error(4, what) {}
};

// Numerical failure: non-finite intermediate, quadrature non-convergence,
// optimizer divergence. Exit code 5.
class numeric_error : public error {
public:
  explicit numeric_error(const std::string& what) : error(5, what) {}
};

} // namespace sip

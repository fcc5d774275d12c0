#pragma once

#include <stdexcept>
#include <string>

namespace harmdstm {

// Validation failures throw std::invalid_argument directly.

/// Factorization or conditioning failure inside a numerical routine.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (non-finite values, tmin > tmax, ...).
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A site-year panel is missing days; the message lists the gaps.
class incomplete_panel_error : public data_error {
 public:
  using data_error::data_error;
};

/// File or directory could not be read or written.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All harmonic coefficients are zero; the cycle has no extremum.
class degenerate_cycle_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace harmdstm

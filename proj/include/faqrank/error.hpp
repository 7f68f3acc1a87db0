#pragma once

#include <stdexcept>
#include <string>

namespace faqrank {

/// Input data broke a format rule or a documented invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace faqrank

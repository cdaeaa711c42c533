#ifndef LQFT_ERRORS_HPP
#define LQFT_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lqft {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FactorizationError : public NumericalError {
 public:
  FactorizationError(const std::string& what, std::size_t leading_minor)
      : NumericalError(what), leading_minor_(leading_minor) {}

  // 1-based order of the first leading minor that was not positive.
  std::size_t leading_minor() const noexcept { return leading_minor_; }

 private:
  std::size_t leading_minor_;
};

class UnsupportedConfiguration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace lqft

#endif

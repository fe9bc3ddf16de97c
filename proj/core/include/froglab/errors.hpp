#ifndef FROGLAB_ERRORS_HPP
#define FROGLAB_ERRORS_HPP

#include <stdexcept>

namespace froglab {

// Invalid vertex/tree combinations and malformed vertex strings or keys.
struct AddressingError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Bad experiment parameters (d < 2, negative rates, unknown names, ...).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace froglab

#endif  // FROGLAB_ERRORS_HPP

#ifndef MBTREE_ERRORS_HPP
#define MBTREE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mbtree {

// Unreadable/unwritable files.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally invalid input file (bad magic, bad schema, bad template).
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated operation precondition (mismatched L, out-of-range parameter).
struct InputError : std::invalid_argument {
  explicit InputError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Unusable run configuration (empty C&C list, empty signature set).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mbtree

#endif  // MBTREE_ERRORS_HPP

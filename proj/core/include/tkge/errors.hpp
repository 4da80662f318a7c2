#pragma once

#include <stdexcept>
#include <string>

namespace tkge {

// Base class for everything the library throws; the CLI maps these to
// nonzero exit codes.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class io_error : public error {
 public:
  using error::error;
};

// Wrong field count or otherwise unusable input line.
class malformed_line_error : public error {
 public:
  using error::error;
};

// Name not present in a frozen vocabulary.
class unknown_symbol_error : public error {
 public:
  using error::error;
};

// Time token that is neither a year, a dated year, nor an unknown marker.
class time_parse_error : public error {
 public:
  using error::error;
};

class config_error : public error {
 public:
  using error::error;
};

class index_error : public error {
 public:
  using error::error;
};

}  // namespace tkge

#pragma once

#include <stdexcept>
#include <string>

namespace semap {

// Malformed on-disk input. The message names the file and, when known, the line.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested operation is incompatible with the data or settings, e.g. stereo
// labeling on a dataset without right label maps.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace semap

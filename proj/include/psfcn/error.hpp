#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace psfcn {

// Error taxonomy shared by the library and the CLI exit-code contract:
// shape/value/io map to exit code 2 (bad data), numeric maps to 3.
class Error : public std::runtime_error {
 public:
  enum class Kind { shape, value, io, numeric };

  Error(Kind kind, std::string msg)
      : std::runtime_error(std::move(msg)), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

template <class... Args>
std::string strf(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

template <class... Args>
[[noreturn]] void throw_shape(Args&&... args) {
  throw Error(Error::Kind::shape, strf(std::forward<Args>(args)...));
}

template <class... Args>
[[noreturn]] void throw_value(Args&&... args) {
  throw Error(Error::Kind::value, strf(std::forward<Args>(args)...));
}

template <class... Args>
[[noreturn]] void throw_io(Args&&... args) {
  throw Error(Error::Kind::io, strf(std::forward<Args>(args)...));
}

template <class... Args>
[[noreturn]] void throw_numeric(Args&&... args) {
  throw Error(Error::Kind::numeric, strf(std::forward<Args>(args)...));
}

}  // namespace psfcn

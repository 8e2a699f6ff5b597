#pragma once

#include <stdexcept>
#include <string>

namespace sharetrack {

// Root of every exception thrown by the library. Each failure kind gets its
// own subclass so callers can catch exactly what they handle.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SHARETRACK_DEFINE_ERROR(Name)         \
  class Name : public Error {                 \
   public:                                    \
    using Error::Error;                       \
  }

}  // namespace sharetrack

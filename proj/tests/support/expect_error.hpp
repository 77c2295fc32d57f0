#pragma once

#include <doctest.h>

#include <string>

#include "prismmap/error.hpp"

namespace prismmap::testing {

// Runs fn and returns the kind of the prismmap::Error it throws.
template <typename Fn>
ErrorKind kind_of(Fn&& fn, std::string* message = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kIo;
}

}  // namespace prismmap::testing

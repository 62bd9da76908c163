// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace pia {

enum class ErrorKind {
  parse,        // lexing / parsing / unbound constant
  type,         // simple-type or resource-type failure, checker rejection
  unsat,        // size- or pipeline-unsatisfiable
  solver,       // solver process failure, timeout, unparseable model
  io,           // file system
  internal,     // broken invariant inside the library
  mismatch,     // semiring instance mismatch and similar API misuse
};

std::string to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pia

#pragma once

#include <stdexcept>
#include <string>

namespace divexp {

enum class errc {
  parse = 1,
  validation,
  degenerate,
  singular,
  budget,
  convergence,
  range,
  argument,
};

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace divexp

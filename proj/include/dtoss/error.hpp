#pragma once

#include <stdexcept>
#include <string>

namespace dtoss {

// All library failures surface as this type; the message names the violated
// precondition (e.g. "degenerate generator pair").
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dtoss

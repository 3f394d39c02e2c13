#include "ramcp/format.hpp"

#include <charconv>

namespace ramcp {

std::string format_number(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

}  // namespace ramcp

#pragma once

#include <string>

namespace ramcp {

/// Shortest decimal text that parses back to the same double; locale
/// independent, so output files are byte-stable across environments.
std::string format_number(double value);

}  // namespace ramcp

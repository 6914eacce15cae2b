#include "rejgate/format.hpp"

#include <cstdio>

namespace rejgate {

std::string fixed6(double value) {
  if (value == 0.0) value = 0.0;  // fold -0.0
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6f", value);
  return buffer;
}

std::string compact6(double value) {
  std::string text = fixed6(value);
  auto last = text.find_last_not_of('0');
  if (last != std::string::npos && text[last] == '.') --last;
  text.erase(last + 1);
  return text;
}

}  // namespace rejgate

#pragma once

#include <string>

namespace rejgate {

// "%.6f" rendering with negative zero normalised; the one way any real value
// reaches a CSV or JSON artifact.
std::string fixed6(double value);

// fixed6 with trailing zeros (and a bare trailing dot) trimmed; used for the
// human-facing level notation like "[0.17, 0.22]_g".
std::string compact6(double value);

}  // namespace rejgate

#pragma once

#include <stdexcept>
#include <string>

namespace linedp {

// Malformed or inconsistent input data.  The message names the offending
// record (file, row, release/path) so it can be reported as-is.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A computation that cannot proceed on the given arguments (single-class
// labels, degenerate vocabulary, mismatched model).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace linedp

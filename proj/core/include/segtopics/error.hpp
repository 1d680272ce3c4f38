#pragma once

#include <stdexcept>
#include <string>

namespace segtopics {

// Raised for malformed input: bad documents, violated preconditions,
// schema errors. The CLI maps it to exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised by the binary codecs (EMB1, SGH1) for corrupt or truncated data.
class FormatError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

} // namespace segtopics

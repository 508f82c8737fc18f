#pragma once

#include <stdexcept>
#include <string>

namespace logos {

/// Violation of a data contract (bad dimensions, empty input, overlap, ...).
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File or format problem (missing file, bad magic, truncated payload, ...).
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace logos

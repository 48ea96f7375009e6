#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace occ {

// Stream read/write failure. Carries the byte offset at which the failure
// was detected so truncated files can be diagnosed without a hex dump.
class io_error : public std::runtime_error {
public:
    io_error(const std::string& what, std::uint64_t offset)
        : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

// Structurally malformed container or document.
class format_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Payload size disagrees with the element count announced by the header.
class length_mismatch_error : public format_error {
public:
    using format_error::format_error;
};

// Header names an element type this build does not know.
class unsupported_dtype_error : public format_error {
public:
    using format_error::format_error;
};

// Camera document carries non-finite entries or a rotation block that is not
// orthonormal.
class invalid_pose_error : public format_error {
public:
    using format_error::format_error;
};

// Camera looks straight up or down, so no horizontal forward direction
// exists to place a grid.
class degenerate_view_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Prediction grid contains a label outside the evaluable range at a voxel
// that participates in scoring.
class invalid_prediction_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace occ

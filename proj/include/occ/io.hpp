#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "occ/camera.hpp"
#include "occ/geometry.hpp"
#include "occ/tensor.hpp"

namespace occ {

// Binary tensor container. Layout, all integers little-endian:
//   bytes 0..3   magic "OCCT"
//   bytes 4..5   format version, currently 1
//   byte  6      dtype code (0 f32, 1 f64, 2 u8, 3 i64)
//   byte  7      rank r, 1..8
//   8 + 8*i      extent of axis i, uint64
//   8 + 8*r ..   payload, row-major, little-endian elements
inline constexpr char kTensorMagic[4] = {'O', 'C', 'C', 'T'};
inline constexpr std::uint16_t kTensorVersion = 1;

// Returns the number of bytes written.
std::uint64_t write_tensor(const DenseTensor& tensor, std::ostream& sink);
DenseTensor read_tensor(std::istream& source);

// File variants. Writes go through a temp file in the same directory plus a
// rename, so readers never observe a half-written tensor.
void write_tensor_file(const DenseTensor& tensor, const std::filesystem::path& path);
DenseTensor read_tensor_file(const std::filesystem::path& path);

// Camera document: JSON object with fx, fy, cx, cy, width, height, and
// cam_to_world as 16 numbers, row-major. Non-finite entries (including JSON
// null) and non-orthonormal rotations are rejected with invalid_pose_error.
CameraModel read_camera(std::istream& source);
CameraModel read_camera_file(const std::filesystem::path& path);
void write_camera(const CameraModel& cam, std::ostream& sink);
void write_camera_file(const CameraModel& cam, const std::filesystem::path& path);

// Scene bounds document: {"min": [x,y,z], "max": [x,y,z]}.
Aabb read_bounds(std::istream& source);
Aabb read_bounds_file(const std::filesystem::path& path);
void write_bounds_file(const Aabb& bounds, const std::filesystem::path& path);

enum class Split : std::uint8_t { train, val };

const char* to_string(Split split);
Split split_from_string(const std::string& text);

// One processed frame in a dataset manifest. File paths are relative to the
// manifest's directory; empty strings mean "not applicable" (e.g. no label
// file for a rejected frame). verdict is "keep" or "reject"; reason is the
// reject reason or "none".
struct FrameEntry {
    std::string frame_id;
    std::string camera_file;
    std::string label_file;
    Split split = Split::train;
    std::string verdict;
    std::string reason;

    bool operator==(const FrameEntry&) const = default;
};

struct DatasetManifest {
    std::string scene_id;
    std::uint64_t seed = 0;
    std::vector<FrameEntry> frames;

    // Frame ids must be unique and every non-empty path relative.
    void validate() const;

    bool operator==(const DatasetManifest&) const = default;
};

// Canonical serialization: sorted keys, two-space indent, trailing newline.
// Equal manifests serialize to identical bytes.
std::string manifest_to_string(const DatasetManifest& manifest);
DatasetManifest manifest_from_string(const std::string& text);

DatasetManifest read_manifest_file(const std::filesystem::path& path);
void write_manifest_file(const DatasetManifest& manifest, const std::filesystem::path& path);

// Shared atomic-write helper: writes content to a sibling temp file and
// renames it over `path`.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace occ

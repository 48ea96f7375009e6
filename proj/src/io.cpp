#include "occ/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "occ/errors.hpp"

namespace occ {

namespace {

using nlohmann::json;

void store_u16_le(std::uint16_t v, unsigned char* out) {
    out[0] = static_cast<unsigned char>(v & 0xFF);
    out[1] = static_cast<unsigned char>((v >> 8) & 0xFF);
}

void store_u64_le(std::uint64_t v, unsigned char* out) {
    for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
}

std::uint16_t load_u16_le(const unsigned char* in) {
    return static_cast<std::uint16_t>(in[0] | (in[1] << 8));
}

std::uint64_t load_u64_le(const unsigned char* in) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
    return v;
}

// Reverses each element in place; only needed on big-endian hosts.
void byteswap_elements(std::byte* data, std::size_t count, std::size_t elem_size) {
    if (elem_size == 1) return;
    for (std::size_t i = 0; i < count; ++i) {
        std::byte* e = data + i * elem_size;
        for (std::size_t a = 0, b = elem_size - 1; a < b; ++a, --b) std::swap(e[a], e[b]);
    }
}

}  // namespace

std::uint64_t write_tensor(const DenseTensor& tensor, std::ostream& sink) {
    std::uint64_t offset = 0;
    const auto put = [&](const void* data, std::size_t size) {
        sink.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(size));
        if (!sink) throw io_error("tensor write failed", offset);
        offset += size;
    };

    put(kTensorMagic, 4);
    unsigned char u16buf[2];
    store_u16_le(kTensorVersion, u16buf);
    put(u16buf, 2);
    const unsigned char dtype_code = static_cast<unsigned char>(tensor.dtype());
    put(&dtype_code, 1);
    const unsigned char rank = static_cast<unsigned char>(tensor.rank());
    put(&rank, 1);
    unsigned char u64buf[8];
    for (std::uint64_t d : tensor.dims()) {
        store_u64_le(d, u64buf);
        put(u64buf, 8);
    }

    const auto payload = tensor.raw();
    if constexpr (std::endian::native == std::endian::little) {
        put(payload.data(), payload.size());
    } else {
        std::vector<std::byte> swapped(payload.begin(), payload.end());
        byteswap_elements(swapped.data(), tensor.element_count(), dtype_size(tensor.dtype()));
        put(swapped.data(), swapped.size());
    }
    return offset;
}

DenseTensor read_tensor(std::istream& source) {
    std::uint64_t offset = 0;
    const auto get = [&](void* data, std::size_t size, const char* what, bool payload) {
        source.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(size));
        const std::size_t got = static_cast<std::size_t>(source.gcount());
        if (got != size) {
            const std::string msg = std::string(what) + ": expected " + std::to_string(size) +
                                    " bytes at offset " + std::to_string(offset) + ", got " +
                                    std::to_string(got);
            if (payload) throw length_mismatch_error(msg);
            throw format_error(msg);
        }
        offset += size;
    };

    char magic[4];
    get(magic, 4, "truncated tensor header", false);
    if (std::memcmp(magic, kTensorMagic, 4) != 0) {
        throw format_error("bad tensor magic, not an OCCT stream");
    }

    unsigned char u16buf[2];
    get(u16buf, 2, "truncated tensor header", false);
    const std::uint16_t version = load_u16_le(u16buf);
    if (version != kTensorVersion) {
        throw format_error("unsupported tensor format version " + std::to_string(version));
    }

    unsigned char dtype_code = 0;
    get(&dtype_code, 1, "truncated tensor header", false);
    if (dtype_code > static_cast<unsigned char>(Dtype::i64)) {
        throw unsupported_dtype_error("unknown dtype code " + std::to_string(dtype_code));
    }
    const Dtype dtype = static_cast<Dtype>(dtype_code);

    unsigned char rank = 0;
    get(&rank, 1, "truncated tensor header", false);
    if (rank < 1 || rank > 8) {
        throw format_error("tensor rank " + std::to_string(rank) + " outside 1..8");
    }

    std::vector<std::uint64_t> dims(rank);
    unsigned char u64buf[8];
    for (unsigned char i = 0; i < rank; ++i) {
        get(u64buf, 8, "truncated tensor header", false);
        dims[i] = load_u64_le(u64buf);
    }

    std::uint64_t elements = 0;
    try {
        elements = checked_element_count(dims);
    } catch (const std::invalid_argument& e) {
        throw format_error(e.what());
    }
    const std::uint64_t esize = dtype_size(dtype);
    if (elements > std::numeric_limits<std::size_t>::max() / esize) {
        throw format_error("tensor payload too large for this address space");
    }

    std::vector<std::byte> payload(static_cast<std::size_t>(elements * esize));
    if (!payload.empty()) get(payload.data(), payload.size(), "truncated tensor payload", true);
    if constexpr (std::endian::native != std::endian::little) {
        byteswap_elements(payload.data(), static_cast<std::size_t>(elements), esize);
    }
    return DenseTensor(dtype, std::move(dims), std::move(payload));
}

void write_tensor_file(const DenseTensor& tensor, const std::filesystem::path& path) {
    std::ostringstream buf(std::ios::binary);
    write_tensor(tensor, buf);
    atomic_write_file(path, buf.str());
}

DenseTensor read_tensor_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string(), 0);
    return read_tensor(in);
}

namespace {

json parse_document(std::istream& source, const char* what) {
    try {
        return json::parse(source);
    } catch (const json::exception& e) {
        throw format_error(std::string(what) + ": " + e.what());
    }
}

// Numeric field fetch for camera documents. JSON cannot carry NaN or inf, so
// writers emit null for them; a null here means a non-finite pose entry.
double pose_number(const json& value, const char* what) {
    if (value.is_null()) throw invalid_pose_error(std::string(what) + " is non-finite");
    if (!value.is_number()) throw format_error(std::string(what) + " is not a number");
    const double d = value.get<double>();
    if (!std::isfinite(d)) throw invalid_pose_error(std::string(what) + " is non-finite");
    return d;
}

const json& require_key(const json& obj, const char* key, const char* what) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw format_error(std::string(what) + " is missing key \"" + key + "\"");
    return *it;
}

json number_or_null(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

}  // namespace

CameraModel read_camera(std::istream& source) {
    const json doc = parse_document(source, "camera document");
    if (!doc.is_object()) throw format_error("camera document is not a JSON object");

    const double fx = pose_number(require_key(doc, "fx", "camera document"), "fx");
    const double fy = pose_number(require_key(doc, "fy", "camera document"), "fy");
    const double cx = pose_number(require_key(doc, "cx", "camera document"), "cx");
    const double cy = pose_number(require_key(doc, "cy", "camera document"), "cy");

    const json& jw = require_key(doc, "width", "camera document");
    const json& jh = require_key(doc, "height", "camera document");
    if (!jw.is_number_integer() || !jh.is_number_integer()) {
        throw format_error("camera width/height must be integers");
    }
    const int width = jw.get<int>();
    const int height = jh.get<int>();

    const json& jm = require_key(doc, "cam_to_world", "camera document");
    if (!jm.is_array() || jm.size() != 16) {
        throw format_error("cam_to_world must be an array of 16 numbers");
    }
    Mat4 pose;
    for (std::size_t i = 0; i < 16; ++i) pose[i] = pose_number(jm[i], "cam_to_world entry");

    if (!rotation_orthonormal(pose, kRotationTol)) {
        throw invalid_pose_error("camera rotation block is not orthonormal");
    }
    try {
        return CameraModel(fx, fy, cx, cy, width, height, pose);
    } catch (const std::invalid_argument& e) {
        throw invalid_pose_error(e.what());
    }
}

CameraModel read_camera_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path.string(), 0);
    return read_camera(in);
}

void write_camera(const CameraModel& cam, std::ostream& sink) {
    json doc;
    doc["fx"] = cam.fx();
    doc["fy"] = cam.fy();
    doc["cx"] = cam.cx();
    doc["cy"] = cam.cy();
    doc["width"] = cam.width();
    doc["height"] = cam.height();
    json m = json::array();
    for (double v : cam.cam_to_world()) m.push_back(number_or_null(v));
    doc["cam_to_world"] = std::move(m);
    sink << doc.dump(2) << "\n";
}

void write_camera_file(const CameraModel& cam, const std::filesystem::path& path) {
    std::ostringstream buf;
    write_camera(cam, buf);
    atomic_write_file(path, buf.str());
}

Aabb read_bounds(std::istream& source) {
    const json doc = parse_document(source, "bounds document");
    if (!doc.is_object()) throw format_error("bounds document is not a JSON object");
    const auto corner = [&](const char* key) {
        const json& arr = require_key(doc, key, "bounds document");
        if (!arr.is_array() || arr.size() != 3) {
            throw format_error(std::string("bounds ") + key + " must be an array of 3 numbers");
        }
        Vec3 v;
        double* comp[3] = {&v.x, &v.y, &v.z};
        for (std::size_t i = 0; i < 3; ++i) {
            const json& e = arr[i];
            if (!e.is_number()) throw format_error(std::string("bounds ") + key + " entry is not a number");
            *comp[i] = e.get<double>();
            if (!std::isfinite(*comp[i])) {
                throw format_error(std::string("bounds ") + key + " entry is non-finite");
            }
        }
        return v;
    };
    Aabb bounds{corner("min"), corner("max")};
    if (!(bounds.min.x <= bounds.max.x && bounds.min.y <= bounds.max.y &&
          bounds.min.z <= bounds.max.z)) {
        throw format_error("bounds min exceeds max");
    }
    return bounds;
}

Aabb read_bounds_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path.string(), 0);
    return read_bounds(in);
}

void write_bounds_file(const Aabb& bounds, const std::filesystem::path& path) {
    json doc;
    doc["min"] = {bounds.min.x, bounds.min.y, bounds.min.z};
    doc["max"] = {bounds.max.x, bounds.max.y, bounds.max.z};
    atomic_write_file(path, doc.dump(2) + "\n");
}

const char* to_string(Split split) {
    return split == Split::train ? "train" : "val";
}

Split split_from_string(const std::string& text) {
    if (text == "train") return Split::train;
    if (text == "val") return Split::val;
    throw format_error("unknown split \"" + text + "\"");
}

void DatasetManifest::validate() const {
    std::set<std::string> ids;
    for (const FrameEntry& f : frames) {
        if (f.frame_id.empty()) throw format_error("manifest frame with empty id");
        if (!ids.insert(f.frame_id).second) {
            throw format_error("duplicate frame id \"" + f.frame_id + "\" in manifest");
        }
        for (const std::string* p : {&f.camera_file, &f.label_file}) {
            if (!p->empty() && (*p)[0] == '/') {
                throw format_error("manifest path \"" + *p + "\" is not relative");
            }
        }
    }
}

std::string manifest_to_string(const DatasetManifest& manifest) {
    manifest.validate();
    json doc;
    doc["scene_id"] = manifest.scene_id;
    doc["seed"] = manifest.seed;
    json frames = json::array();
    for (const FrameEntry& f : manifest.frames) {
        json e;
        e["frame_id"] = f.frame_id;
        e["camera_file"] = f.camera_file;
        e["label_file"] = f.label_file;
        e["split"] = to_string(f.split);
        e["verdict"] = f.verdict;
        e["reason"] = f.reason;
        frames.push_back(std::move(e));
    }
    doc["frames"] = std::move(frames);
    return doc.dump(2) + "\n";
}

DatasetManifest manifest_from_string(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw format_error(std::string("manifest: ") + e.what());
    }
    if (!doc.is_object()) throw format_error("manifest is not a JSON object");

    DatasetManifest manifest;
    const json& jid = require_key(doc, "scene_id", "manifest");
    if (!jid.is_string()) throw format_error("manifest scene_id must be a string");
    manifest.scene_id = jid.get<std::string>();

    const json& jseed = require_key(doc, "seed", "manifest");
    if (!jseed.is_number_unsigned()) throw format_error("manifest seed must be a non-negative integer");
    manifest.seed = jseed.get<std::uint64_t>();

    const json& jframes = require_key(doc, "frames", "manifest");
    if (!jframes.is_array()) throw format_error("manifest frames must be an array");
    for (const json& e : jframes) {
        if (!e.is_object()) throw format_error("manifest frame entry is not an object");
        FrameEntry f;
        const auto str = [&](const char* key) {
            const json& v = require_key(e, key, "manifest frame");
            if (!v.is_string()) throw format_error(std::string("manifest frame ") + key + " must be a string");
            return v.get<std::string>();
        };
        f.frame_id = str("frame_id");
        f.camera_file = str("camera_file");
        f.label_file = str("label_file");
        f.split = split_from_string(str("split"));
        f.verdict = str("verdict");
        f.reason = str("reason");
        manifest.frames.push_back(std::move(f));
    }
    manifest.validate();
    return manifest;
}

DatasetManifest read_manifest_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path.string(), 0);
    std::ostringstream buf;
    buf << in.rdbuf();
    return manifest_from_string(buf.str());
}

void write_manifest_file(const DatasetManifest& manifest, const std::filesystem::path& path) {
    atomic_write_file(path, manifest_to_string(manifest));
}

void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open " + tmp.string() + " for writing", 0);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw io_error("write failed for " + tmp.string(), 0);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw io_error("rename failed for " + path.string() + ": " + ec.message(), 0);
    }
}

}  // namespace occ

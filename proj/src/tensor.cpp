#include "occ/tensor.hpp"

#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>

#include "occ/errors.hpp"

namespace occ {

namespace {

constexpr std::size_t kMaxRank = 8;

template <typename T>
std::vector<std::byte> bytes_of(std::span<const T> values) {
    std::vector<std::byte> out(values.size_bytes());
    if (!out.empty()) std::memcpy(out.data(), values.data(), out.size());
    return out;
}

template <typename T>
std::span<const T> typed_view(Dtype want, Dtype have, std::span<const std::byte> bytes) {
    if (have != want) {
        throw std::logic_error(std::string("tensor holds ") + dtype_name(have) +
                               ", requested " + dtype_name(want));
    }
    return {reinterpret_cast<const T*>(bytes.data()), bytes.size() / sizeof(T)};
}

template <typename T>
std::span<T> typed_view(Dtype want, Dtype have, std::span<std::byte> bytes) {
    if (have != want) {
        throw std::logic_error(std::string("tensor holds ") + dtype_name(have) +
                               ", requested " + dtype_name(want));
    }
    return {reinterpret_cast<T*>(bytes.data()), bytes.size() / sizeof(T)};
}

}  // namespace

std::size_t dtype_size(Dtype dtype) {
    switch (dtype) {
        case Dtype::f32: return 4;
        case Dtype::f64: return 8;
        case Dtype::u8: return 1;
        case Dtype::i64: return 8;
    }
    throw unsupported_dtype_error("unknown dtype code " +
                                  std::to_string(static_cast<unsigned>(dtype)));
}

const char* dtype_name(Dtype dtype) {
    switch (dtype) {
        case Dtype::f32: return "f32";
        case Dtype::f64: return "f64";
        case Dtype::u8: return "u8";
        case Dtype::i64: return "i64";
    }
    return "unknown";
}

std::uint64_t checked_element_count(std::span<const std::uint64_t> dims) {
    if (dims.empty() || dims.size() > kMaxRank) {
        throw std::invalid_argument("tensor rank must be between 1 and 8, got " +
                                    std::to_string(dims.size()));
    }
    std::uint64_t count = 1;
    for (std::uint64_t d : dims) {
        if (d == 0) throw std::invalid_argument("tensor extents must be positive");
        if (count > std::numeric_limits<std::uint64_t>::max() / d) {
            throw std::invalid_argument("tensor extent product overflows");
        }
        count *= d;
    }
    return count;
}

DenseTensor::DenseTensor(Dtype dtype, std::vector<std::uint64_t> dims)
    : dtype_(dtype), dims_(std::move(dims)) {
    const std::uint64_t esize = dtype_size(dtype_);  // rejects stray codes
    elements_ = checked_element_count(dims_);
    if (elements_ > std::numeric_limits<std::size_t>::max() / esize) {
        throw std::invalid_argument("tensor too large for this address space");
    }
    data_.assign(static_cast<std::size_t>(elements_ * esize), std::byte{0});
}

DenseTensor::DenseTensor(Dtype dtype, std::vector<std::uint64_t> dims, std::vector<std::byte> data)
    : dtype_(dtype), dims_(std::move(dims)), data_(std::move(data)) {
    const std::uint64_t esize = dtype_size(dtype_);
    elements_ = checked_element_count(dims_);
    if (elements_ > std::numeric_limits<std::size_t>::max() / esize ||
        data_.size() != elements_ * esize) {
        throw std::invalid_argument("tensor payload size does not match extents");
    }
}

DenseTensor DenseTensor::from_f32(std::vector<std::uint64_t> dims, std::span<const float> values) {
    return DenseTensor(Dtype::f32, std::move(dims), bytes_of(values));
}

DenseTensor DenseTensor::from_f64(std::vector<std::uint64_t> dims, std::span<const double> values) {
    return DenseTensor(Dtype::f64, std::move(dims), bytes_of(values));
}

DenseTensor DenseTensor::from_u8(std::vector<std::uint64_t> dims, std::span<const std::uint8_t> values) {
    return DenseTensor(Dtype::u8, std::move(dims), bytes_of(values));
}

DenseTensor DenseTensor::from_i64(std::vector<std::uint64_t> dims, std::span<const std::int64_t> values) {
    return DenseTensor(Dtype::i64, std::move(dims), bytes_of(values));
}

std::span<const float> DenseTensor::as_f32() const { return typed_view<float>(Dtype::f32, dtype_, raw()); }
std::span<float> DenseTensor::as_f32() { return typed_view<float>(Dtype::f32, dtype_, raw()); }
std::span<const double> DenseTensor::as_f64() const { return typed_view<double>(Dtype::f64, dtype_, raw()); }
std::span<const std::uint8_t> DenseTensor::as_u8() const { return typed_view<std::uint8_t>(Dtype::u8, dtype_, raw()); }
std::span<std::uint8_t> DenseTensor::as_u8() { return typed_view<std::uint8_t>(Dtype::u8, dtype_, raw()); }
std::span<const std::int64_t> DenseTensor::as_i64() const { return typed_view<std::int64_t>(Dtype::i64, dtype_, raw()); }
std::span<std::int64_t> DenseTensor::as_i64() { return typed_view<std::int64_t>(Dtype::i64, dtype_, raw()); }

std::vector<float> DenseTensor::to_f32_values() const {
    if (dtype_ == Dtype::f32) {
        auto v = as_f32();
        return {v.begin(), v.end()};
    }
    if (dtype_ == Dtype::f64) {
        auto v = as_f64();
        std::vector<float> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i]);
        return out;
    }
    throw std::logic_error(std::string("expected a float tensor, got ") + dtype_name(dtype_));
}

}  // namespace occ

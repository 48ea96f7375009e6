#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace occ {

// Element types the container format can carry. Enumerator values are the
// on-disk dtype codes.
enum class Dtype : std::uint8_t {
    f32 = 0,
    f64 = 1,
    u8 = 2,
    i64 = 3,
};

std::size_t dtype_size(Dtype dtype);
const char* dtype_name(Dtype dtype);

// Validates extents (all positive, rank 1..8) and returns their product,
// rejecting products that overflow uint64 or exceed addressable memory.
std::uint64_t checked_element_count(std::span<const std::uint64_t> dims);

// Dense row-major tensor: the last axis varies fastest. Bytes are kept in
// native order; serialization owns the little-endian conversion.
class DenseTensor {
public:
    DenseTensor(Dtype dtype, std::vector<std::uint64_t> dims);  // zero-filled
    DenseTensor(Dtype dtype, std::vector<std::uint64_t> dims, std::vector<std::byte> data);

    static DenseTensor from_f32(std::vector<std::uint64_t> dims, std::span<const float> values);
    static DenseTensor from_f64(std::vector<std::uint64_t> dims, std::span<const double> values);
    static DenseTensor from_u8(std::vector<std::uint64_t> dims, std::span<const std::uint8_t> values);
    static DenseTensor from_i64(std::vector<std::uint64_t> dims, std::span<const std::int64_t> values);

    Dtype dtype() const noexcept { return dtype_; }
    const std::vector<std::uint64_t>& dims() const noexcept { return dims_; }
    std::size_t rank() const noexcept { return dims_.size(); }
    std::uint64_t element_count() const noexcept { return elements_; }

    std::span<const std::byte> raw() const noexcept { return data_; }
    std::span<std::byte> raw() noexcept { return data_; }

    // Typed views; throw std::logic_error when the dtype does not match.
    std::span<const float> as_f32() const;
    std::span<float> as_f32();
    std::span<const double> as_f64() const;
    std::span<const std::uint8_t> as_u8() const;
    std::span<std::uint8_t> as_u8();
    std::span<const std::int64_t> as_i64() const;
    std::span<std::int64_t> as_i64();

    // Float payload regardless of stored precision: f32 is copied, f64 is
    // narrowed. Integer tensors are rejected.
    std::vector<float> to_f32_values() const;

    bool operator==(const DenseTensor& other) const = default;

private:
    Dtype dtype_;
    std::vector<std::uint64_t> dims_;
    std::uint64_t elements_ = 0;
    std::vector<std::byte> data_;
};

}  // namespace occ

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pegasus::data {

// IDX container (the MNIST on-disk format): 4-byte magic {0, 0, dtype, ndim},
// ndim big-endian u32 extents, then the payload in row-major order. Only the
// unsigned-byte dtype (0x08) is supported.
struct IdxData {
    std::vector<std::uint32_t> dims;
    std::vector<std::uint8_t> data;

    std::size_t count() const { return dims.empty() ? 0 : dims[0]; }
    std::size_t record_size() const {
        std::size_t s = 1;
        for (std::size_t i = 1; i < dims.size(); ++i) s *= dims[i];
        return s;
    }
};

// Throws BadMagic on a malformed header, TruncatedFile if the payload is
// short, IoError on anything else. load_idx(save_idx(x)) is bit-exact.
IdxData load_idx(const std::string& path);
void save_idx(const std::string& path, const IdxData& idx);

} // namespace pegasus::data

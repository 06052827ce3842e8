#include "pegasus/idx.hpp"

#include <cstdio>
#include <memory>

#include "pegasus/errors.hpp"

namespace pegasus::data {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::uint32_t read_be_u32(std::FILE* f, const std::string& path) {
    unsigned char b[4];
    if (std::fread(b, 1, 4, f) != 4)
        throw TruncatedFile("idx: unexpected end of header in " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be_u32(std::FILE* f, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
    std::fwrite(b, 1, 4, f);
}

} // namespace

IdxData load_idx(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw IoError("idx: cannot open " + path);

    const std::uint32_t magic = read_be_u32(f.get(), path);
    if ((magic >> 16) != 0)
        throw BadMagic("idx: bad magic in " + path);
    const unsigned dtype = (magic >> 8) & 0xff;
    const unsigned ndim = magic & 0xff;
    if (dtype != 0x08)
        throw BadMagic("idx: unsupported dtype in " + path + " (only u8 supported)");
    if (ndim == 0 || ndim > 4)
        throw BadMagic("idx: unsupported dimension count in " + path);

    IdxData out;
    out.dims.resize(ndim);
    std::size_t total = 1;
    for (unsigned i = 0; i < ndim; ++i) {
        out.dims[i] = read_be_u32(f.get(), path);
        total *= out.dims[i];
    }

    out.data.resize(total);
    const std::size_t got = total ? std::fread(out.data.data(), 1, total, f.get()) : 0;
    if (got != total)
        throw TruncatedFile("idx: payload short in " + path);
    if (std::fgetc(f.get()) != EOF)
        throw IoError("idx: trailing bytes in " + path);
    return out;
}

void save_idx(const std::string& path, const IdxData& idx) {
    if (idx.dims.empty() || idx.dims.size() > 4)
        throw InvalidParams("idx: dimension count must be in [1,4]");
    std::size_t total = 1;
    for (auto d : idx.dims) total *= d;
    if (total != idx.data.size())
        throw ShapeMismatch("idx: dims do not match payload size");

    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw IoError("idx: cannot write " + path);
    write_be_u32(f.get(), 0x00000800u | static_cast<std::uint32_t>(idx.dims.size()));
    for (auto d : idx.dims) write_be_u32(f.get(), d);
    if (!idx.data.empty())
        std::fwrite(idx.data.data(), 1, idx.data.size(), f.get());
    if (std::ferror(f.get()))
        throw IoError("idx: write failed for " + path);
}

} // namespace pegasus::data

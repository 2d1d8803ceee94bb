#include "grid/container.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "container format assumes a little-endian host");

namespace grid {

namespace {

std::uint32_t crc_of(const std::uint8_t* data, std::size_t n) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(data),
                static_cast<uInt>(n)));
}

}  // namespace

ContainerWriter::ContainerWriter(const std::string& kind) {
    buf_.insert(buf_.end(), kContainerMagic, kContainerMagic + 4);
    put_u32(kContainerVersion);
    put_string(kind);
}

void ContainerWriter::put_u32(std::uint32_t v) {
    std::uint8_t raw[4];
    std::memcpy(raw, &v, 4);
    buf_.insert(buf_.end(), raw, raw + 4);
}

void ContainerWriter::put_u64(std::uint64_t v) {
    std::uint8_t raw[8];
    std::memcpy(raw, &v, 8);
    buf_.insert(buf_.end(), raw, raw + 8);
}

void ContainerWriter::put_f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(bits);
}

void ContainerWriter::put_string(const std::string& s) {
    put_u32(static_cast<std::uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
}

void ContainerWriter::put_f64_array(const std::vector<double>& v) {
    put_u64(v.size());
    const std::size_t bytes = v.size() * sizeof(double);
    const std::size_t off = buf_.size();
    buf_.resize(off + bytes);
    if (bytes > 0) std::memcpy(buf_.data() + off, v.data(), bytes);
}

void ContainerWriter::write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(buf_.data()),
              static_cast<std::streamsize>(buf_.size()));
    const std::uint32_t crc = crc_of(buf_.data(), buf_.size());
    out.write(reinterpret_cast<const char*>(&crc), 4);
    if (!out) throw std::runtime_error("write failed: " + path);
}

ContainerReader::ContainerReader(const std::string& path,
                                 const std::string& expected_kind) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("cannot open: " + path);
    const std::streamsize size = in.tellg();
    if (size < 12) throw std::runtime_error("corrupt container (too short): " + path);
    in.seekg(0);
    std::vector<std::uint8_t> all(static_cast<std::size_t>(size));
    in.read(reinterpret_cast<char*>(all.data()), size);
    if (!in) throw std::runtime_error("read failed: " + path);

    std::uint32_t stored;
    std::memcpy(&stored, all.data() + all.size() - 4, 4);
    if (crc_of(all.data(), all.size() - 4) != stored)
        throw std::runtime_error("checksum mismatch (truncated or corrupt): " +
                                 path);
    all.resize(all.size() - 4);
    buf_ = std::move(all);

    need(4);
    if (std::memcmp(buf_.data(), kContainerMagic, 4) != 0)
        throw std::runtime_error("bad magic, not a GRID container: " + path);
    pos_ = 4;

    const std::uint32_t version = get_u32();
    if (version > kContainerVersion)
        throw std::runtime_error(
            "unsupported format version " + std::to_string(version) +
            " (this build reads up to " + std::to_string(kContainerVersion) +
            "): " + path);

    const std::string kind = get_string();
    if (kind != expected_kind)
        throw std::runtime_error("container kind is '" + kind +
                                 "', expected '" + expected_kind + "': " + path);
}

void ContainerReader::need(std::size_t n) const {
    if (pos_ + n > buf_.size())
        throw std::runtime_error("container ended unexpectedly");
}

std::uint32_t ContainerReader::get_u32() {
    need(4);
    std::uint32_t v;
    std::memcpy(&v, buf_.data() + pos_, 4);
    pos_ += 4;
    return v;
}

std::uint64_t ContainerReader::get_u64() {
    need(8);
    std::uint64_t v;
    std::memcpy(&v, buf_.data() + pos_, 8);
    pos_ += 8;
    return v;
}

double ContainerReader::get_f64() {
    const std::uint64_t bits = get_u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::string ContainerReader::get_string() {
    const std::uint32_t n = get_u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
    pos_ += n;
    return s;
}

std::vector<double> ContainerReader::get_f64_array() {
    const std::uint64_t n = get_u64();
    if (n > (buf_.size() - pos_) / sizeof(double))
        throw std::runtime_error("container ended unexpectedly");
    const std::size_t bytes = static_cast<std::size_t>(n) * sizeof(double);
    need(bytes);
    std::vector<double> v(static_cast<std::size_t>(n));
    if (bytes > 0) std::memcpy(v.data(), buf_.data() + pos_, bytes);
    pos_ += bytes;
    return v;
}

}  // namespace grid

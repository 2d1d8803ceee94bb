#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace grid {

// Binary container shared by model and dataset files:
//   magic "GRID" | version u32 | kind string | payload... | CRC-32
// All integers and doubles are little-endian; the CRC covers every byte
// before it. Loading a truncated or bit-flipped file fails the checksum;
// a file written by a newer format version fails the version check before
// anything is parsed.
inline constexpr char kContainerMagic[4] = {'G', 'R', 'I', 'D'};
inline constexpr std::uint32_t kContainerVersion = 1;

class ContainerWriter {
public:
    explicit ContainerWriter(const std::string& kind);

    void put_u32(std::uint32_t v);
    void put_u64(std::uint64_t v);
    void put_f64(double v);
    void put_string(const std::string& s);
    void put_f64_array(const std::vector<double>& v);

    // Appends the CRC and writes the file atomically enough for our use
    // (write then rename is overkill here; plain write suffices).
    void write_file(const std::string& path) const;

private:
    std::vector<std::uint8_t> buf_;
};

class ContainerReader {
public:
    // Reads the whole file, verifies CRC, magic, version and kind.
    // Throws std::runtime_error with a specific message on each failure.
    ContainerReader(const std::string& path, const std::string& expected_kind);

    std::uint32_t get_u32();
    std::uint64_t get_u64();
    double get_f64();
    std::string get_string();
    std::vector<double> get_f64_array();

    bool at_end() const { return pos_ == buf_.size(); }

private:
    void need(std::size_t n) const;

    std::vector<std::uint8_t> buf_;  // payload without trailing CRC
    std::size_t pos_ = 0;
};

}  // namespace grid

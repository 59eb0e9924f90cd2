#include "bytesgan/util.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "bytesgan/errors.hpp"

namespace bytesgan {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t file_digest(const std::string& path) {
    auto bytes = read_file_bytes(path);
    Fnv1a h;
    h.update(bytes.data(), bytes.size());
    return h.digest();
}

void ByteWriter::put_string(std::string_view s) {
    if (s.size() > 0xFFFF) throw ConfigError("string too long for a u16 length prefix");
    put(static_cast<std::uint16_t>(s.size()));
    put_bytes(s);
}

std::string ByteReader::get_string() {
    const auto n = get<std::uint16_t>();
    auto b = get_bytes(n);
    return std::string(b.begin(), b.end());
}

void ByteReader::need(std::size_t n) const {
    if (data_.size() - pos_ < n) {
        throw FormatError(context_ + ": unexpected end of data at offset " + std::to_string(pos_));
    }
}

std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path);
    return data;
}

void write_file_bytes(const std::string& path, std::span<const unsigned char> bytes) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    // Write to a sibling temp file and rename so readers never see a partial file.
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + path);
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("write failed: " + path);
    }
    std::filesystem::rename(tmp, path);
}

void write_text_file(const std::string& path, std::string_view text) {
    write_file_bytes(path, std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
}

} // namespace bytesgan

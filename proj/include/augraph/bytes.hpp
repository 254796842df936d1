#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "augraph/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts unsupported");

/// Byte-level plumbing shared by the corpus and checkpoint containers: an
/// append-only buffer writer, a bounds-checked reader, and sealed-file helpers
/// that pin the common layout (magic, payload, trailing FNV-1a checksum).
namespace augraph::bytes {

inline std::uint64_t fnv1a(const std::uint8_t* data, std::size_t len) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= data[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline void put_bytes(std::vector<std::uint8_t>& out, const void* src, std::size_t len) {
  const auto* p = static_cast<const std::uint8_t*>(src);
  out.insert(out.end(), p, p + len);
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) { put_bytes(out, &v, 4); }
inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) { put_bytes(out, &v, 8); }
inline void put_f64(std::vector<std::uint8_t>& out, double v) { put_bytes(out, &v, 8); }

inline void put_str(std::vector<std::uint8_t>& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  put_bytes(out, s.data(), s.size());
}

/// Sequential reader over a frozen byte range; every overrun reports the
/// offending offset and is tagged as a truncation.
class Reader {
public:
  Reader(const std::uint8_t* data, std::size_t len, std::string context)
      : data_(data), len_(len), context_(std::move(context)) {}

  void read(void* dst, std::size_t n) {
    if (pos_ + n > len_) {
      throw DataError(DataError::Kind::truncated,
                      context_ + " ends early: wanted " + std::to_string(n) +
                          " bytes at offset " + std::to_string(pos_) + " of " +
                          std::to_string(len_));
    }
    std::memcpy(dst, data_ + pos_, n);
    pos_ += n;
  }

  std::uint32_t u32() {
    std::uint32_t v;
    read(&v, 4);
    return v;
  }

  std::uint64_t u64() {
    std::uint64_t v;
    read(&v, 8);
    return v;
  }

  double f64() {
    double v;
    read(&v, 8);
    return v;
  }

  std::string str() {
    std::string s(u32(), '\0');
    read(s.data(), s.size());
    return s;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return len_ - pos_; }

private:
  const std::uint8_t* data_;
  std::size_t len_;
  std::string context_;
  std::size_t pos_ = 0;
};

/// Appends the checksum over everything buffered so far and writes the file.
inline void write_sealed(const std::string& path, std::vector<std::uint8_t>& buf,
                         const std::string& context) {
  put_u64(buf, fnv1a(buf.data(), buf.size()));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError(DataError::Kind::missing, context + ": cannot open '" + path + "'");
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) {
    throw DataError(DataError::Kind::truncated, context + ": short write to '" + path + "'");
  }
}

/// Reads a sealed file back, checking in order: the file exists, it is long
/// enough to hold a header, the 8-byte magic matches, and the trailing
/// checksum agrees. Returns the whole file; the payload is everything before
/// the final 8 checksum bytes.
inline std::vector<std::uint8_t> read_sealed(const std::string& path, const char (&magic)[8],
                                             const std::string& context) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError(DataError::Kind::missing, context + ": cannot open '" + path + "'");
  }
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  if (buf.size() < 8) {
    throw DataError(DataError::Kind::truncated, context + ": '" + path + "' shorter than header");
  }
  if (std::memcmp(buf.data(), magic, 8) != 0) {
    throw DataError(DataError::Kind::format,
                    context + ": '" + path + "' does not start with the expected magic");
  }
  if (buf.size() < 8 + 4 + 8) {  // magic + version + checksum at minimum
    throw DataError(DataError::Kind::truncated, context + ": '" + path + "' shorter than header");
  }
  std::uint64_t stored;
  std::memcpy(&stored, buf.data() + buf.size() - 8, 8);
  if (fnv1a(buf.data(), buf.size() - 8) != stored) {
    throw DataError(DataError::Kind::checksum, context + ": checksum mismatch in '" + path + "'");
  }
  return buf;
}

}  // namespace augraph::bytes

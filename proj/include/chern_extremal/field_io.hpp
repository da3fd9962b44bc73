#pragma once

// Field files.
//
// CEXF1: a 64-byte ASCII header followed by the values as little-endian
// IEEE doubles in the row-major grid order. The header is
//   "CEXF1 n=<n> N=<N> axes=x1y1...xnyn count=<N^(2n)>"
// padded with spaces to 63 bytes and terminated by '\n'.
//
// CSV: header x1,y1,...,xn,yn,value then one row per grid point.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "chern_extremal/errors.hpp"
#include "chern_extremal/grid.hpp"

namespace chern_extremal {

inline constexpr std::size_t cexf_header_size = 64;

namespace detail {

inline std::string axis_order(int n) {
  std::string s;
  for (int j = 1; j <= n; ++j) s += "x" + std::to_string(j) + "y" + std::to_string(j);
  return s;
}

inline std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0x00000000000000FFull) << 56) | ((v & 0x000000000000FF00ull) << 40) |
        ((v & 0x0000000000FF0000ull) << 24) | ((v & 0x00000000FF000000ull) << 8) |
        ((v & 0x000000FF00000000ull) >> 8) | ((v & 0x0000FF0000000000ull) >> 24) |
        ((v & 0x00FF000000000000ull) >> 40) | ((v & 0xFF00000000000000ull) >> 56);
  }
  return v;
}

}  // namespace detail

inline std::string cexf_header(const GridSpec& spec) {
  std::string h = "CEXF1 n=" + std::to_string(spec.n()) + " N=" + std::to_string(spec.N()) +
                  " axes=" + detail::axis_order(spec.n()) +
                  " count=" + std::to_string(spec.size());
  if (h.size() > cexf_header_size - 1) {
    throw Error(ErrorKind::InvalidArgument, "grid too large for a CEXF1 header");
  }
  h.resize(cexf_header_size - 1, ' ');
  h += '\n';
  return h;
}

/// Appends one CEXF1 record to an open stream.
inline void write_field(std::ostream& os, const ScalarField& f) {
  const std::string header = cexf_header(f.spec());
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  std::vector<std::uint64_t> raw(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    raw[i] = detail::to_little_endian(std::bit_cast<std::uint64_t>(f[i]));
  }
  os.write(reinterpret_cast<const char*>(raw.data()),
           static_cast<std::streamsize>(raw.size() * sizeof(std::uint64_t)));
}

inline void write_field(const ScalarField& f, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  write_field(os, f);
  if (!os) throw Error(ErrorKind::IoError, "write failed: " + path.string());
}

/// Reads one CEXF1 record from the stream's current position. `remaining`
/// is the number of payload bytes available after the header, used to
/// report truncated or oversized payloads as a shape mismatch.
inline ScalarField read_field(std::istream& is, std::uintmax_t remaining, bool exact_size) {
  char buf[cexf_header_size];
  is.read(buf, cexf_header_size);
  if (is.gcount() != static_cast<std::streamsize>(cexf_header_size)) {
    throw Error(ErrorKind::MalformedHeader, "file shorter than the 64-byte header");
  }
  if (std::memcmp(buf, "CEXF1 ", 6) != 0 || buf[cexf_header_size - 1] != '\n') {
    throw Error(ErrorKind::MalformedHeader, "missing CEXF1 magic");
  }
  std::istringstream hs(std::string(buf + 6, cexf_header_size - 7));
  int n = 0, N = 0;
  std::string axes;
  unsigned long long count = 0;
  bool got_n = false, got_N = false, got_axes = false, got_count = false;
  for (std::string tok; hs >> tok;) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::MalformedHeader, "bad header token '" + tok + "'");
    }
    const std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
    try {
      if (key == "n") n = std::stoi(value), got_n = true;
      else if (key == "N") N = std::stoi(value), got_N = true;
      else if (key == "axes") axes = value, got_axes = true;
      else if (key == "count") count = std::stoull(value), got_count = true;
      else throw Error(ErrorKind::MalformedHeader, "unknown header key '" + key + "'");
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::MalformedHeader, "bad header value '" + tok + "'");
    }
  }
  if (!(got_n && got_N && got_axes && got_count)) {
    throw Error(ErrorKind::MalformedHeader, "header lacks one of n, N, axes, count");
  }
  GridSpec spec = [&] {
    try {
      return GridSpec(n, N);
    } catch (const Error& e) {
      throw Error(ErrorKind::MalformedHeader, e.what());
    }
  }();
  if (axes != detail::axis_order(n)) {
    throw Error(ErrorKind::MalformedHeader, "unsupported axis order '" + axes + "'");
  }
  if (count != spec.size()) {
    throw Error(ErrorKind::ShapeMismatch, "header count " + std::to_string(count) +
                                              " but n=" + std::to_string(n) + ", N=" +
                                              std::to_string(N) + " needs " +
                                              std::to_string(spec.size()));
  }
  const std::uintmax_t payload = count * sizeof(double);
  if (remaining < payload || (exact_size && remaining != payload)) {
    throw Error(ErrorKind::ShapeMismatch, "payload holds " + std::to_string(remaining) +
                                              " bytes, header implies " +
                                              std::to_string(payload));
  }
  std::vector<std::uint64_t> raw(count);
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(payload));
  if (!is) throw Error(ErrorKind::IoError, "short read in field payload");
  ScalarField f(spec);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = std::bit_cast<double>(detail::to_little_endian(raw[i]));
  }
  return f;
}

inline ScalarField read_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  const auto size = std::filesystem::file_size(path);
  return read_field(is, size < cexf_header_size ? 0 : size - cexf_header_size, true);
}

/// Reads every record of a file holding several concatenated fields.
inline std::vector<ScalarField> read_fields(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  const auto size = std::filesystem::file_size(path);
  std::vector<ScalarField> out;
  std::uintmax_t offset = 0;
  while (offset < size) {
    if (size - offset < cexf_header_size) {
      throw Error(ErrorKind::MalformedHeader, "trailing bytes after last record");
    }
    out.push_back(read_field(is, size - offset - cexf_header_size, false));
    offset += cexf_header_size + out.back().size() * sizeof(double);
  }
  return out;
}

inline void write_csv(const ScalarField& f, std::ostream& os) {
  const GridSpec& spec = f.spec();
  for (int j = 1; j <= spec.n(); ++j) os << "x" << j << ",y" << j << ",";
  os << "value\n";
  std::ostringstream line;
  line.precision(17);
  for (std::size_t p = 0; p < f.size(); ++p) {
    line.str("");
    for (int a = 0; a < spec.axes(); ++a) line << spec.coordinate(p, a) << ",";
    line << f[p] << "\n";
    os << line.str();
  }
}

inline void write_csv(const ScalarField& f, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  write_csv(f, os);
}

}  // namespace chern_extremal

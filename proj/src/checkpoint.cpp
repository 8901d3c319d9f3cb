// Copyright 2026 CycleSpec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cyclespec/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "cyclespec/errors.hpp"

namespace cyclespec {

namespace {

constexpr char kMagic[] = "CSPC1";
constexpr std::size_t kMagicLen = 5;

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw FormatError("checkpoint truncated while reading integer");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& os, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(os, v);
}

double get_f64(std::istream& is) {
  const std::uint64_t v = get_u64(is);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host for memcpy of "
              "doubles; integers are serialized byte-by-byte");

}  // namespace

void save_checkpoint(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, const Tensor*>>& params) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open checkpoint for writing: " +
                           tmp.string());
    os.write(kMagic, kMagicLen);
    for (const auto& [name, tensor] : params) {
      put_u64(os, name.size());
      os.write(name.data(), static_cast<std::streamsize>(name.size()));
      put_u64(os, static_cast<std::uint64_t>(tensor->rank()));
      for (Index a = 0; a < tensor->rank(); ++a) {
        put_u64(os, static_cast<std::uint64_t>(tensor->extent(a)));
      }
      for (Index i = 0; i < tensor->numel(); ++i) {
        put_f64(os, tensor->values()[i]);
      }
    }
    if (!os) throw IoError("write failure on checkpoint: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place: " + ec.message());
}

std::map<std::string, Tensor> load_checkpoint(
    const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw StateError("checkpoint not found: " + path.string());
  char magic[kMagicLen];
  is.read(magic, kMagicLen);
  if (!is || std::memcmp(magic, kMagic, kMagicLen) != 0) {
    throw FormatError("bad checkpoint magic in " + path.string());
  }
  std::map<std::string, Tensor> out;
  while (true) {
    is.peek();
    if (is.eof()) break;
    const std::uint64_t name_len = get_u64(is);
    if (name_len > (1u << 16)) {
      throw FormatError("implausible name length in " + path.string());
    }
    std::string name(name_len, '\0');
    is.read(name.data(), static_cast<std::streamsize>(name_len));
    const std::uint64_t rank = get_u64(is);
    if (rank > 8) throw FormatError("implausible rank in " + path.string());
    Shape shape(rank);
    for (auto& e : shape) e = static_cast<Index>(get_u64(is));
    const Index n = shape_numel(shape);
    Eigen::ArrayXd data(n);
    for (Index i = 0; i < n; ++i) data[i] = get_f64(is);
    if (!is) throw FormatError("checkpoint truncated in " + path.string());
    out.emplace(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  return out;
}

}  // namespace cyclespec

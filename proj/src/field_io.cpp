#include "hjlab/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "hjlab/errors.hpp"

namespace hjlab {

namespace {

constexpr char kMagic[4] = {'H', 'J', 'M', 'R'};

template <class U>
void put_le(std::vector<unsigned char>& out, U value) {
  for (std::size_t b = 0; b < sizeof(U); ++b) {
    out.push_back(static_cast<unsigned char>((value >> (8 * b)) & 0xFFu));
  }
}

template <class U>
U get_le(const std::vector<unsigned char>& in, std::size_t& pos) {
  if (pos + sizeof(U) > in.size()) throw IoError("field file is truncated");
  U value = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) value |= static_cast<U>(in[pos + b]) << (8 * b);
  pos += sizeof(U);
  return value;
}

}  // namespace

std::vector<unsigned char> encode_field(const ScalarField& u) {
  const auto& g = u.grid();
  std::vector<unsigned char> out;
  out.reserve(12 + 4 * static_cast<std::size_t>(g.dim()) + 8 * g.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_le<std::uint32_t>(out, kFieldFormatVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
  for (int a = 0; a < g.dim(); ++a) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.n()));
  for (double v : u.values()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

ScalarField decode_field(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw IoError("not a field file (bad magic bytes)");
  }
  std::size_t pos = 4;
  const auto version = get_le<std::uint32_t>(bytes, pos);
  if (version != kFieldFormatVersion) {
    throw IoError("unsupported field file version " + std::to_string(version));
  }
  const auto dim = get_le<std::uint32_t>(bytes, pos);
  if (dim < 1 || dim > 3) throw IoError("field file has invalid dimension " + std::to_string(dim));
  std::uint32_t n = 0;
  for (std::uint32_t a = 0; a < dim; ++a) {
    const auto na = get_le<std::uint32_t>(bytes, pos);
    if (a == 0) n = na;
    if (na != n) throw IoError("field file has a non-cubic grid");
  }
  GridSpec grid = [&] {
    try {
      return GridSpec(static_cast<int>(dim), static_cast<int>(n));
    } catch (const ConfigurationError& e) {
      throw IoError(std::string("field file grid is invalid: ") + e.what());
    }
  }();
  if (bytes.size() != pos + 8 * grid.size()) {
    throw IoError("field file payload has " + std::to_string(bytes.size() - pos) +
                  " bytes, expected " + std::to_string(8 * grid.size()));
  }
  std::vector<double> values(grid.size());
  for (auto& v : values) v = std::bit_cast<double>(get_le<std::uint64_t>(bytes, pos));
  try {
    return ScalarField(grid, std::move(values));
  } catch (const EvaluationError& e) {
    throw IoError(std::string("field file holds a non-finite value: ") + e.what());
  }
}

void write_field(const std::filesystem::path& path, const ScalarField& u) {
  const auto bytes = encode_field(u);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

ScalarField read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_field(bytes);
}

}  // namespace hjlab

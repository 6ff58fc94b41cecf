#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hjlab/field.hpp"

namespace hjlab {

// Binary field file, little-endian throughout:
//   "HJMR" | u32 version (=1) | u32 d | u32 n (repeated d times) | n^d binary64 values
// Values are row-major with the last index fastest.
inline constexpr std::uint32_t kFieldFormatVersion = 1;

std::vector<unsigned char> encode_field(const ScalarField& u);
ScalarField decode_field(const std::vector<unsigned char>& bytes);

void write_field(const std::filesystem::path& path, const ScalarField& u);
ScalarField read_field(const std::filesystem::path& path);

}  // namespace hjlab

#pragma once

#include <filesystem>
#include <string>

#include "abba/models/layout.hpp"
#include "abba/sampler/nuts.hpp"

namespace abba::io {

/// Little-endian columnar layout:
///
///   magic "ABBADRAW", u32 version, u32 chains, u64 iterations, u32 parameters
///   u32 metadata length, metadata bytes (free-form, JSON by convention)
///   name table: per parameter u32 length + UTF-8 bytes
///   per chain: f64 step size, f64[parameters] inverse metric
///   per chain: f64[iterations] log density, u8[iterations] divergent, u8[iterations] tree depth,
///              f64[iterations] acceptance statistic
///   per parameter, per chain: f64[iterations] draws
///
/// Draws are stored on the constrained scale when written through a layout.
struct DrawsFile {
  sampler::PosteriorDraws draws;
  std::string metadata;
};

inline constexpr std::uint32_t kDrawsVersion = 1;

/// Converts every draw to the constrained scale.
sampler::PosteriorDraws constrain_draws(const sampler::PosteriorDraws& draws,
                                        const models::ParameterLayout& layout);

std::string encode_draws(const DrawsFile& file);
/// Throws MalformedInput on a bad magic number, unknown version or truncated content.
DrawsFile decode_draws(std::string_view bytes);

void write_draws(const std::filesystem::path& path, const DrawsFile& file);
DrawsFile read_draws(const std::filesystem::path& path);

}  // namespace abba::io

#pragma once

#include <map>
#include <string>
#include <vector>

#include "rotlim/grid.hpp"

namespace rotlim {

/// Snapshot file format "SPF1": 4-byte magic, u32 little-endian n, u32
/// component count, then per component n x n complex coefficients as
/// little-endian f64 (re, im) pairs, row-major with k2 fastest in FFT
/// wraparound order. All components share one grid.
void write_spf(const std::string& path, const std::vector<SpectralScalar>& components);
std::vector<SpectralScalar> read_spf(const std::string& path);

/// Flat UTF-8 `key = value` configuration file. Keys are the CLI flag
/// names without the leading dashes; '#' starts a comment; blank lines
/// are skipped. Duplicate keys keep the last value.
std::map<std::string, std::string> read_config_file(const std::string& path);

}  // namespace rotlim

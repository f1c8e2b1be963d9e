// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "wgs/gaussian.hpp"
#include "wgs/image.hpp"
#include "wgs/refiner.hpp"
#include "wgs/repair.hpp"
#include "wgs/wavelet.hpp"

namespace wgs {

namespace fs = std::filesystem;

/// Binary PPM (P6) or PGM (P5) with maxval 255. Samples map to v / 255.
/// Throws IoError if unreadable and ParseError (with byte offset) if malformed.
Image load_image(const fs::path& path);
Image decode_netpbm(const std::string& bytes);

/// 1-channel images are written as P5, 3-channel as P6; values are clamped
/// and rounded to 8 bits. Any alpha plane is dropped.
void save_image(const Image& img, const fs::path& path);
std::string encode_netpbm(const Image& img);

/// Masks round-trip through P5 with 0 / 255 samples (nonzero loads as 1).
BinaryPlane load_mask(const fs::path& path);
void save_mask(const BinaryPlane& mask, const fs::path& path);

/// Single-precision little-endian containers. Each starts with a 4-byte magic:
///   WGSI  raw image: u32 height, width, channels, has_alpha; samples; alpha
///   WSB1  subbands:  u32 original height, width, channels; LL, LH, HL, HH
///   WGSC  cloud:     u32 count; 14 values per primitive in packed order
///   WGRN  refiner:   u32 layer count; per layer u32 in, out; weights then
///                    biases in layer order
///   WSPD  dataset:   u32 domain (0 = LL, 1 = HF), count; per sample a raw
///                    image each for corrupted, clean and confidence
void save_raw_image(const Image& img, const fs::path& path);
Image load_raw_image(const fs::path& path);
void save_subbands(const SubbandSet& sb, const fs::path& path);
SubbandSet load_subbands(const fs::path& path);
void save_cloud(const GaussianCloud& cloud, const fs::path& path);
GaussianCloud load_cloud(const fs::path& path);
void save_refiner(const RefinerNet& net, const fs::path& path);
RefinerNet load_refiner(const fs::path& path);
void save_dataset(const SubbandPairDataset& ds, const fs::path& path);
SubbandPairDataset load_dataset(const fs::path& path);

std::string read_file(const fs::path& path);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const fs::path& path, const std::string& contents);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// `key = value` lines, one per entry.
std::string format_key_values(const KeyValues& kv);

struct KeyValueLine {
    std::string key;
    std::string value;
    int line = 0;
};

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
/// Throws ConfigError naming the line for anything else.
std::vector<KeyValueLine> parse_key_values(const std::string& text);

}  // namespace wgs

// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
// Texton documents (JSON), 8-bit images (PNG, binary PPM) and the TXG1 tensor container.
#pragma once

#include "texton/estimation.hpp"
#include "texton/splatting.hpp"
#include "texton/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace texton {

inline constexpr int kFormatVersion = 1;

struct Provenance {
    std::uint64_t seed = 0;
    std::string op;
    bool operator==(const Provenance &) const = default;
};

struct TextonDocument {
    GaussianSet set;
    std::optional<Provenance> provenance;
};

/// Canonical text: fixed key order, two-space indent, shortest round-trip floats, trailing newline.
std::string serializeDocument(const TextonDocument &doc);

/// Parses and validates. Structural problems throw Error with the JSON path of
/// the offending field ("gaussians[2].cov: not symmetric"); invariant violations
/// throw ValidationError.
TextonDocument parseDocument(std::string_view text);

std::string readFile(const std::filesystem::path &path);
void writeFile(const std::filesystem::path &path, std::string_view bytes);

void saveSet(const GaussianSet &set, const std::filesystem::path &path,
             const std::optional<Provenance> &provenance = std::nullopt);
TextonDocument loadDocument(const std::filesystem::path &path);
GaussianSet loadSet(const std::filesystem::path &path);

// --- images ----------------------------------------------------------------

enum class ImageFormat { Png, Ppm };

/// By extension (.png, .ppm); throws for anything else.
ImageFormat imageFormatFor(const std::filesystem::path &path);

/// round(255 v) after clamping to [0,1].
std::uint8_t toByte(double v);

std::string encodePpm(const RgbImage &img);
RgbImage decodePpm(std::string_view bytes);
std::string encodePng(const RgbImage &img);
RgbImage decodePng(std::string_view bytes);

/// Detects the format from the magic bytes.
RgbImage decodeImage(std::string_view bytes);
std::string encodeImage(const RgbImage &img, ImageFormat format);

RgbImage readImage(const std::filesystem::path &path);
void writeImage(const RgbImage &img, const std::filesystem::path &path);

/// Writes frames as <dir>/<stem>_0000.<ext>, ... (at least four digits). Returns the paths.
std::vector<std::filesystem::path> writeFrames(const std::vector<RgbImage> &frames,
                                               const std::filesystem::path &dir, const std::string &stem,
                                               ImageFormat format);

// --- tensors ---------------------------------------------------------------

/// Dense float32 tensor, row-major with the last dimension fastest.
struct Tensor {
    std::vector<std::uint32_t> dims;
    std::vector<float> data;

    std::size_t elementCount() const;
};

/// "TXG1", u32 ndims, u32 dims[ndims], f32 payload; all little-endian.
std::string encodeTensor(const Tensor &t);
Tensor decodeTensor(std::string_view bytes);

/// [H, W, C]
Tensor tensorFromGrid(const FeatureGrid<float> &grid);
/// [n, H, W]
Tensor tensorFromMasks(const SegmentationStack &masks);
SegmentationStack masksFromTensor(const Tensor &t);
/// [H, W, d + 2]: appearance channels followed by the two direction channels.
Tensor tensorFromMaps(const DenseMaps &maps);
DenseMaps mapsFromTensor(const Tensor &t);

} // namespace texton

// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
#include "texton/io.hpp"

#include "texton/core.hpp"

#include <json.hpp>
#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace texton {

using Json = nlohmann::ordered_json;

// --- documents -------------------------------------------------------------

namespace {

Json vec2Json(const Vec2 &v) { return Json::array({v.x(), v.y()}); }

Json gaussianJson(const TextonGaussian &g) {
    Json j;
    j["delta"] = g.weight;
    j["prob"]  = g.existence;
    j["mean"]  = vec2Json(g.mean);
    j["cov"]   = Json::array({Json::array({g.cov(0, 0), g.cov(0, 1)}), Json::array({g.cov(1, 0), g.cov(1, 1)})});
    j["dir"]   = vec2Json(g.direction);
    Json feat  = Json::array();
    for (Eigen::Index k = 0; k < g.feature.size(); ++k) {
        feat.push_back(g.feature(k));
    }
    j["feat"] = std::move(feat);
    if (g.maskArea) {
        j["area"] = *g.maskArea;
    }
    return j;
}

[[noreturn]] void fieldError(const std::string &path, const std::string &what) { throw Error(path + ": " + what); }

const Json &member(const Json &obj, const char *key, const std::string &path) {
    if (!obj.is_object()) {
        fieldError(path, "expected an object");
    }
    const auto it = obj.find(key);
    if (it == obj.end()) {
        fieldError(path + "." + key, "missing");
    }
    return *it;
}

double number(const Json &j, const std::string &path) {
    if (!j.is_number()) {
        fieldError(path, "expected a number");
    }
    return j.get<double>();
}

long long integer(const Json &j, const std::string &path) {
    if (!j.is_number_integer()) {
        fieldError(path, "expected an integer");
    }
    return j.get<long long>();
}

Vec2 vec2(const Json &j, const std::string &path) {
    if (!j.is_array() || j.size() != 2) {
        fieldError(path, "expected an array of 2 numbers");
    }
    return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

TextonGaussian parseGaussian(const Json &j, const std::string &path) {
    TextonGaussian g;
    g.weight    = number(member(j, "delta", path), path + ".delta");
    g.existence = number(member(j, "prob", path), path + ".prob");
    g.mean      = vec2(member(j, "mean", path), path + ".mean");
    const Json &cov = member(j, "cov", path);
    if (!cov.is_array() || cov.size() != 2) {
        fieldError(path + ".cov", "expected a 2x2 array");
    }
    const Vec2 r0 = vec2(cov[0], path + ".cov[0]");
    const Vec2 r1 = vec2(cov[1], path + ".cov[1]");
    g.cov << r0.x(), r0.y(), r1.x(), r1.y();
    if (std::abs(g.cov(0, 1) - g.cov(1, 0)) > 1e-9) {
        fieldError(path + ".cov", "not symmetric");
    }
    g.direction     = vec2(member(j, "dir", path), path + ".dir");
    const Json &feat = member(j, "feat", path);
    if (!feat.is_array()) {
        fieldError(path + ".feat", "expected an array");
    }
    g.feature.resize(Eigen::Index(feat.size()));
    for (std::size_t k = 0; k < feat.size(); ++k) {
        g.feature(Eigen::Index(k)) = number(feat[k], path + ".feat[" + std::to_string(k) + "]");
    }
    if (const auto it = j.find("area"); it != j.end()) {
        g.maskArea = number(*it, path + ".area");
    }
    return g;
}

} // namespace

std::string serializeDocument(const TextonDocument &doc) {
    const GaussianSet &set = doc.set;
    Json j;
    j["format_version"] = kFormatVersion;
    j["frame"]          = Json{{"width", set.frame.width}, {"height", set.frame.height}};
    j["feature_dim"]    = set.featureDim;
    j["capacity"]       = set.capacity;
    Json list           = Json::array();
    for (const TextonGaussian &g : set.gaussians) {
        list.push_back(gaussianJson(g));
    }
    j["gaussians"] = std::move(list);
    if (doc.provenance) {
        j["provenance"] = Json{{"seed", doc.provenance->seed}, {"op", doc.provenance->op}};
    }
    return j.dump(2) + "\n";
}

TextonDocument parseDocument(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error &e) {
        throw Error(std::string("document: ") + e.what());
    }
    const std::string root = "document";
    const long long version = integer(member(j, "format_version", root), "format_version");
    if (version != kFormatVersion) {
        fieldError("format_version", "unsupported version " + std::to_string(version));
    }
    TextonDocument doc;
    GaussianSet &set     = doc.set;
    const Json &frame    = member(j, "frame", root);
    set.frame.width      = int(integer(member(frame, "width", "frame"), "frame.width"));
    set.frame.height     = int(integer(member(frame, "height", "frame"), "frame.height"));
    set.featureDim       = int(integer(member(j, "feature_dim", root), "feature_dim"));
    set.capacity         = int(integer(member(j, "capacity", root), "capacity"));
    const Json &gaussians = member(j, "gaussians", root);
    if (!gaussians.is_array()) {
        fieldError("gaussians", "expected an array");
    }
    for (std::size_t i = 0; i < gaussians.size(); ++i) {
        set.gaussians.push_back(parseGaussian(gaussians[i], "gaussians[" + std::to_string(i) + "]"));
    }
    if (const auto it = j.find("provenance"); it != j.end()) {
        Provenance p;
        const Json &seed = member(*it, "seed", "provenance");
        if (!seed.is_number_unsigned()) {
            fieldError("provenance.seed", "expected a non-negative integer");
        }
        p.seed           = seed.get<std::uint64_t>();
        const Json &op   = member(*it, "op", "provenance");
        if (!op.is_string()) {
            fieldError("provenance.op", "expected a string");
        }
        p.op            = op.get<std::string>();
        doc.provenance = std::move(p);
    }
    requireValid(set);
    return doc;
}

std::string readFile(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string() + " for reading");
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void writeFile(const std::filesystem::path &path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) {
        throw Error("write failed: " + path.string());
    }
}

void saveSet(const GaussianSet &set, const std::filesystem::path &path, const std::optional<Provenance> &provenance) {
    writeFile(path, serializeDocument({set, provenance}));
}

TextonDocument loadDocument(const std::filesystem::path &path) {
    try {
        return parseDocument(readFile(path));
    } catch (const ValidationError &) {
        throw;
    } catch (const Error &e) {
        throw Error(path.string() + ": " + e.what());
    }
}

GaussianSet loadSet(const std::filesystem::path &path) { return loadDocument(path).set; }

// --- images ----------------------------------------------------------------

namespace {

[[noreturn]] void endOfStream() { throw Error("unexpected end of stream"); }

std::string hexMagic(std::string_view bytes) {
    std::string out;
    for (std::size_t i = 0; i < std::min<std::size_t>(bytes.size(), 4); ++i) {
        char buf[4];
        std::snprintf(buf, sizeof buf, "%02X", unsigned(static_cast<unsigned char>(bytes[i])));
        if (!out.empty()) {
            out += ' ';
        }
        out += buf;
    }
    return out;
}

std::string lowerExtension(const std::filesystem::path &path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    return ext;
}

/// Tokenizer for the PNM header: skips whitespace and '#' comments.
class PnmHeader {
public:
    explicit PnmHeader(std::string_view bytes) : mBytes(bytes) {}

    std::string token() {
        skipSpace();
        std::string out;
        while (mPos < mBytes.size() && !std::isspace(static_cast<unsigned char>(mBytes[mPos])) &&
               mBytes[mPos] != '#') {
            out += mBytes[mPos++];
        }
        if (out.empty()) {
            endOfStream();
        }
        return out;
    }

    int positive(const char *what) {
        const std::string t = token();
        int v               = 0;
        for (char c : t) {
            if (c < '0' || c > '9' || v > 100000000) {
                throw Error(std::string("PPM: invalid ") + what + " '" + t + "'");
            }
            v = v * 10 + (c - '0');
        }
        if (v < 1) {
            throw Error(std::string("PPM: invalid ") + what + " '" + t + "'");
        }
        return v;
    }

    /// Consumes the single whitespace byte that ends the header.
    std::size_t payloadOffset() {
        if (mPos >= mBytes.size()) {
            endOfStream();
        }
        return mPos + 1;
    }

private:
    void skipSpace() {
        while (mPos < mBytes.size()) {
            const char c = mBytes[mPos];
            if (c == '#') {
                while (mPos < mBytes.size() && mBytes[mPos] != '\n') {
                    ++mPos;
                }
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++mPos;
            } else {
                break;
            }
        }
    }

    std::string_view mBytes;
    std::size_t mPos = 0;
};

RgbImage fromBytes(int width, int height, const unsigned char *px) {
    RgbImage img(width, height);
    for (std::size_t k = 0; k < img.data.size(); ++k) {
        img.data[k] = double(px[k]) / 255.0;
    }
    return img;
}

std::vector<unsigned char> toBytes(const RgbImage &img) {
    std::vector<unsigned char> out(img.data.size());
    std::transform(img.data.begin(), img.data.end(), out.begin(), toByte);
    return out;
}

} // namespace

ImageFormat imageFormatFor(const std::filesystem::path &path) {
    const std::string ext = lowerExtension(path);
    if (ext == ".png") {
        return ImageFormat::Png;
    }
    if (ext == ".ppm") {
        return ImageFormat::Ppm;
    }
    throw Error("unsupported image extension '" + ext + "' (expected .png or .ppm)");
}

std::uint8_t toByte(double v) { return std::uint8_t(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

std::string encodePpm(const RgbImage &img) {
    std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    const auto px   = toBytes(img);
    out.append(reinterpret_cast<const char *>(px.data()), px.size());
    return out;
}

RgbImage decodePpm(std::string_view bytes) {
    PnmHeader header(bytes);
    const std::string magic = header.token();
    if (magic != "P6") {
        throw Error("unsupported image format (magic bytes " + hexMagic(bytes) + ")");
    }
    const int width  = header.positive("width");
    const int height = header.positive("height");
    const int maxval = header.positive("maxval");
    if (maxval != 255) {
        throw Error("PPM: unsupported maxval " + std::to_string(maxval) + " (only 8-bit is supported)");
    }
    const std::size_t offset = header.payloadOffset();
    const std::size_t need   = std::size_t(width) * std::size_t(height) * 3;
    if (bytes.size() < offset || bytes.size() - offset < need) {
        endOfStream();
    }
    return fromBytes(width, height, reinterpret_cast<const unsigned char *>(bytes.data() + offset));
}

std::string encodePng(const RgbImage &img) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width   = png_uint_32(img.width);
    image.height  = png_uint_32(img.height);
    image.format  = PNG_FORMAT_RGB;
    const auto px = toBytes(img);
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, px.data(), 0, nullptr)) {
        throw Error(std::string("PNG encode: ") + image.message);
    }
    std::string out(size, '\0');
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, px.data(), 0, nullptr)) {
        throw Error(std::string("PNG encode: ") + image.message);
    }
    out.resize(size);
    return out;
}

RgbImage decodePng(std::string_view bytes) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw Error(std::string("PNG decode: ") + image.message);
    }
    image.format = PNG_FORMAT_RGB;
    std::vector<unsigned char> px(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, px.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw Error(msg.find("EOF") != std::string::npos || msg.find("end") != std::string::npos
                        ? "unexpected end of stream"
                        : "PNG decode: " + msg);
    }
    return fromBytes(int(image.width), int(image.height), px.data());
}

RgbImage decodeImage(std::string_view bytes) {
    if (bytes.empty()) {
        endOfStream();
    }
    static constexpr std::string_view pngMagic("\x89PNG", 4);
    if (bytes.substr(0, 4) == pngMagic) {
        return decodePng(bytes);
    }
    if (bytes.substr(0, 2) == "P6") {
        return decodePpm(bytes);
    }
    throw Error("unsupported image format (magic bytes " + hexMagic(bytes) + ")");
}

std::string encodeImage(const RgbImage &img, ImageFormat format) {
    return format == ImageFormat::Png ? encodePng(img) : encodePpm(img);
}

RgbImage readImage(const std::filesystem::path &path) {
    try {
        return decodeImage(readFile(path));
    } catch (const Error &e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void writeImage(const RgbImage &img, const std::filesystem::path &path) {
    writeFile(path, encodeImage(img, imageFormatFor(path)));
}

std::vector<std::filesystem::path> writeFrames(const std::vector<RgbImage> &frames,
                                               const std::filesystem::path &dir, const std::string &stem,
                                               ImageFormat format) {
    std::filesystem::create_directories(dir);
    const std::size_t digits = std::max<std::size_t>(4, std::to_string(frames.empty() ? 0 : frames.size() - 1).size());
    const char *ext          = format == ImageFormat::Png ? ".png" : ".ppm";
    std::vector<std::filesystem::path> paths;
    for (std::size_t k = 0; k < frames.size(); ++k) {
        std::string index = std::to_string(k);
        index.insert(0, digits - index.size(), '0');
        paths.push_back(dir / (stem + "_" + index + ext));
        writeFile(paths.back(), encodeImage(frames[k], format));
    }
    return paths;
}

// --- tensors ---------------------------------------------------------------

namespace {

void putU32(std::string &out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) {
        out += char((v >> (8 * b)) & 0xFFu);
    }
}

std::uint32_t getU32(std::string_view bytes, std::size_t &pos) {
    if (bytes.size() < pos + 4) {
        endOfStream();
    }
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) {
        v |= std::uint32_t(static_cast<unsigned char>(bytes[pos + std::size_t(b)])) << (8 * b);
    }
    pos += 4;
    return v;
}

} // namespace

std::size_t Tensor::elementCount() const {
    std::size_t n = 1;
    for (std::uint32_t d : dims) {
        n *= d;
    }
    return n;
}

std::string encodeTensor(const Tensor &t) {
    if (t.data.size() != t.elementCount()) {
        throw Error("tensor: payload size does not match dims");
    }
    std::string out = "TXG1";
    putU32(out, std::uint32_t(t.dims.size()));
    for (std::uint32_t d : t.dims) {
        putU32(out, d);
    }
    out.reserve(out.size() + 4 * t.data.size());
    for (float v : t.data) {
        putU32(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

Tensor decodeTensor(std::string_view bytes) {
    if (bytes.size() < 4) {
        endOfStream();
    }
    if (bytes.substr(0, 4) != "TXG1") {
        throw Error("not a TXG1 tensor (magic bytes " + hexMagic(bytes) + ")");
    }
    std::size_t pos = 4;
    Tensor t;
    const std::uint32_t ndims = getU32(bytes, pos);
    if (ndims > 16) {
        throw Error("tensor: implausible rank " + std::to_string(ndims));
    }
    for (std::uint32_t k = 0; k < ndims; ++k) {
        t.dims.push_back(getU32(bytes, pos));
    }
    const std::size_t n = t.elementCount();
    if ((bytes.size() - pos) / 4 < n) {
        endOfStream();
    }
    if (bytes.size() - pos != 4 * n) {
        throw Error("tensor: trailing bytes after payload");
    }
    t.data.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        t.data[k] = std::bit_cast<float>(getU32(bytes, pos));
    }
    return t;
}

Tensor tensorFromGrid(const FeatureGrid<float> &grid) {
    Tensor t;
    t.dims = {std::uint32_t(grid.frame.height), std::uint32_t(grid.frame.width), std::uint32_t(grid.channels)};
    t.data.assign(grid.data.begin(), grid.data.end());
    return t;
}

Tensor tensorFromMasks(const SegmentationStack &masks) {
    Tensor t;
    const ImageFrame &f = masks.frame;
    t.dims = {std::uint32_t(masks.size()), std::uint32_t(f.height), std::uint32_t(f.width)};
    t.data.reserve(t.elementCount());
    for (const auto &m : masks.masks) {
        for (int y = 0; y < f.height; ++y) {
            for (int x = 0; x < f.width; ++x) {
                t.data.push_back(float(m(y, x)));
            }
        }
    }
    return t;
}

SegmentationStack masksFromTensor(const Tensor &t) {
    if (t.dims.size() != 3 || t.dims[1] == 0 || t.dims[2] == 0) {
        throw Error("masks tensor must have dims [n, H, W]");
    }
    const ImageFrame frame{int(t.dims[2]), int(t.dims[1])};
    SegmentationStack out = SegmentationStack::zeros(frame, t.dims[0]);
    std::size_t k         = 0;
    for (auto &m : out.masks) {
        for (int y = 0; y < frame.height; ++y) {
            for (int x = 0; x < frame.width; ++x) {
                m(y, x) = double(t.data[k++]);
            }
        }
    }
    return out;
}

Tensor tensorFromMaps(const DenseMaps &maps) {
    Tensor t;
    const auto d = maps.appearance.cols();
    t.dims = {std::uint32_t(maps.frame.height), std::uint32_t(maps.frame.width), std::uint32_t(d + 2)};
    t.data.reserve(t.elementCount());
    for (Eigen::Index r = 0; r < maps.appearance.rows(); ++r) {
        for (Eigen::Index c = 0; c < d; ++c) {
            t.data.push_back(float(maps.appearance(r, c)));
        }
        t.data.push_back(float(maps.direction(r, 0)));
        t.data.push_back(float(maps.direction(r, 1)));
    }
    return t;
}

DenseMaps mapsFromTensor(const Tensor &t) {
    if (t.dims.size() != 3 || t.dims[2] < 3) {
        throw Error("maps tensor must have dims [H, W, d + 2] with d >= 1");
    }
    DenseMaps maps;
    maps.frame         = {int(t.dims[1]), int(t.dims[0])};
    const auto pixels  = Eigen::Index(t.dims[0]) * Eigen::Index(t.dims[1]);
    const auto d       = Eigen::Index(t.dims[2]) - 2;
    maps.appearance.resize(pixels, d);
    maps.direction.resize(pixels, 2);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < pixels; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) {
            maps.appearance(r, c) = double(t.data[k++]);
        }
        maps.direction(r, 0) = double(t.data[k++]);
        maps.direction(r, 1) = double(t.data[k++]);
    }
    return maps;
}

} // namespace texton

#pragma once

// IDX file reader for MNIST-family datasets (big-endian magic + dimensions,
// raw uint8 payload), with transparent gzip decompression. Pixels are exposed
// as doubles scaled by 1/255 but stored as raw bytes; at 47 x 2400 x 784 the
// scaled copy would be needlessly large.

#include <zlib.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fade/errors.hpp"

namespace fade {

namespace detail {

inline std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open '" + path + "'");
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                      std::istreambuf_iterator<char>());
}

inline std::vector<unsigned char> gunzip(const std::vector<unsigned char>& in,
                                         const std::string& path) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 16) != Z_OK) throw data_error("zlib init failed for '" + path + "'");
    std::vector<unsigned char> out;
    out.reserve(in.size() * 4);
    unsigned char buf[1 << 16];
    zs.next_in = const_cast<unsigned char*>(in.data());
    zs.avail_in = static_cast<unsigned>(in.size());
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = buf;
        zs.avail_out = sizeof(buf);
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw data_error("corrupt gzip stream in '" + path + "'");
        }
        out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
    }
    inflateEnd(&zs);
    return out;
}

// Reads the file, decompressing when it carries the gzip signature.
inline std::vector<unsigned char> read_idx_payload(const std::string& path) {
    auto bytes = read_file_bytes(path);
    if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) return gunzip(bytes, path);
    return bytes;
}

inline std::uint32_t read_be32(const std::vector<unsigned char>& b, std::size_t off) {
    return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
           (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

} // namespace detail

struct IdxImages {
    int count = 0, rows = 0, cols = 0;
    std::vector<std::uint8_t> pixels; // count * rows * cols

    int pixels_per_image() const { return rows * cols; }

    // Image i as `rows*cols` doubles scaled by 1/255 into out[0..n).
    void scaled_image(int i, double* out) const {
        const std::uint8_t* src = pixels.data() + static_cast<std::size_t>(i) * pixels_per_image();
        for (int j = 0; j < pixels_per_image(); ++j) out[j] = src[j] * (1.0 / 255.0);
    }
};

struct IdxLabels {
    std::vector<std::uint8_t> labels;
};

inline IdxImages load_idx_images(const std::string& path) {
    const auto data = detail::read_idx_payload(path);
    if (data.size() < 16) throw data_error("'" + path + "': truncated IDX image header");
    const std::uint32_t magic = detail::read_be32(data, 0);
    if (magic != 0x00000803) {
        char msg[96];
        std::snprintf(msg, sizeof(msg), "bad IDX image magic 0x%08x (want 0x00000803)", magic);
        throw data_error("'" + path + "': " + msg);
    }
    IdxImages imgs;
    imgs.count = static_cast<int>(detail::read_be32(data, 4));
    imgs.rows = static_cast<int>(detail::read_be32(data, 8));
    imgs.cols = static_cast<int>(detail::read_be32(data, 12));
    const std::size_t expected = 16 + static_cast<std::size_t>(imgs.count) * imgs.rows * imgs.cols;
    if (data.size() != expected)
        throw data_error("'" + path + "': payload is " + std::to_string(data.size()) +
                         " bytes, expected " + std::to_string(expected));
    imgs.pixels.assign(data.begin() + 16, data.end());
    return imgs;
}

inline IdxLabels load_idx_labels(const std::string& path, int num_classes) {
    const auto data = detail::read_idx_payload(path);
    if (data.size() < 8) throw data_error("'" + path + "': truncated IDX label header");
    const std::uint32_t magic = detail::read_be32(data, 0);
    if (magic != 0x00000801) {
        char msg[96];
        std::snprintf(msg, sizeof(msg), "bad IDX label magic 0x%08x (want 0x00000801)", magic);
        throw data_error("'" + path + "': " + msg);
    }
    const std::size_t count = detail::read_be32(data, 4);
    if (data.size() != 8 + count)
        throw data_error("'" + path + "': payload is " + std::to_string(data.size()) +
                         " bytes, expected " + std::to_string(8 + count));
    IdxLabels lbl;
    lbl.labels.assign(data.begin() + 8, data.end());
    for (std::size_t i = 0; i < lbl.labels.size(); ++i)
        if (lbl.labels[i] >= num_classes)
            throw data_error("'" + path + "': label " + std::to_string(int(lbl.labels[i])) +
                             " at index " + std::to_string(i) + " out of range [0, " +
                             std::to_string(num_classes) + ")");
    return lbl;
}

struct EmnistDataset {
    IdxImages images;
    IdxLabels labels;
    int num_classes = 47;

    int size() const { return images.count; }
};

inline EmnistDataset load_emnist(const std::string& images_path, const std::string& labels_path,
                                 int num_classes = 47) {
    EmnistDataset ds;
    ds.num_classes = num_classes;
    ds.images = load_idx_images(images_path);
    ds.labels = load_idx_labels(labels_path, num_classes);
    if (ds.images.count != static_cast<int>(ds.labels.labels.size()))
        throw data_error("image count " + std::to_string(ds.images.count) +
                         " != label count " + std::to_string(ds.labels.labels.size()));
    return ds;
}

// Locates the EMNIST Balanced train split under `root` (directly or in an
// "emnist" subdirectory), preferring the gzipped names the dataset ships
// with. Returns the loaded dataset or throws data_error with the search
// paths.
inline EmnistDataset load_emnist_from_root(const std::string& root) {
    namespace fs = std::filesystem;
    const char* img_names[] = {"emnist-balanced-train-images-idx3-ubyte.gz",
                               "emnist-balanced-train-images-idx3-ubyte"};
    const char* lbl_names[] = {"emnist-balanced-train-labels-idx1-ubyte.gz",
                               "emnist-balanced-train-labels-idx1-ubyte"};
    for (const auto& dir : {fs::path(root), fs::path(root) / "emnist"}) {
        for (int v = 0; v < 2; ++v) {
            const auto img = dir / img_names[v];
            const auto lbl = dir / lbl_names[v];
            if (fs::exists(img) && fs::exists(lbl)) return load_emnist(img.string(), lbl.string());
        }
    }
    throw data_error("EMNIST Balanced train files not found under '" + root +
                     "' (expected emnist-balanced-train-{images-idx3,labels-idx1}-ubyte[.gz])");
}

} // namespace fade

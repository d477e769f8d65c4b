#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "pixmatch/error.hpp"
#include "pixmatch/tensor.hpp"

// Bit-exact tensor serialization plus grayscale image export.
//
// Tensor file layout (fixed little-endian regardless of host):
//   magic    4 bytes, ASCII "EMT1"
//   rank     1 unsigned byte, must be 2 or 3
//   dims     rank x 32-bit unsigned integers
//   payload  product(dims) x 32-bit IEEE-754 floats, row-major
// Total length is exactly 5 + 4*rank + 4*product(dims) bytes.
namespace pixmatch::io {

inline constexpr char kMagic[4] = {'E', 'M', 'T', '1'};

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& buf, std::uint32_t v) {
    buf.push_back(static_cast<std::uint8_t>(v & 0xFF));
    buf.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    buf.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
    buf.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_tensor(const TensorData& tensor) {
    const std::size_t rank = tensor.dims.size();
    if (rank != 2 && rank != 3) {
        throw UnsupportedRankError("tensor rank " + std::to_string(rank) +
                                   " unsupported; expected 2 or 3");
    }
    std::size_t count = 1;
    for (std::size_t d : tensor.dims) {
        if (d == 0 || d > std::numeric_limits<std::uint32_t>::max()) {
            throw ParameterError("tensor dimension out of range for serialization");
        }
        count *= d;
    }
    if (tensor.values.size() != count) {
        throw DimensionError("tensor payload does not match its dims");
    }
    std::vector<std::uint8_t> buf;
    buf.reserve(5 + 4 * rank + 4 * count);
    buf.insert(buf.end(), kMagic, kMagic + 4);
    buf.push_back(static_cast<std::uint8_t>(rank));
    for (std::size_t d : tensor.dims) {
        detail::put_u32(buf, static_cast<std::uint32_t>(d));
    }
    for (float v : tensor.values) {
        detail::put_u32(buf, std::bit_cast<std::uint32_t>(v));
    }
    return buf;
}

inline TensorData decode_tensor(const std::vector<std::uint8_t>& buf) {
    if (buf.size() < 5) {
        throw LengthError("tensor file shorter than its fixed header");
    }
    if (!std::equal(kMagic, kMagic + 4, buf.begin())) {
        throw FormatError("bad magic; not a tensor file");
    }
    const std::size_t rank = buf[4];
    if (rank != 2 && rank != 3) {
        throw UnsupportedRankError("tensor rank " + std::to_string(rank) +
                                   " unsupported; expected 2 or 3");
    }
    if (buf.size() < 5 + 4 * rank) {
        throw LengthError("tensor file truncated inside the dims header");
    }
    TensorData tensor;
    std::uint64_t count = 1;
    for (std::size_t i = 0; i < rank; ++i) {
        const std::uint32_t d = detail::get_u32(buf.data() + 5 + 4 * i);
        if (d == 0) {
            throw FormatError("tensor dimension 0 in header");
        }
        tensor.dims.push_back(d);
        count *= d;
        if (count > (std::uint64_t{1} << 32)) {
            throw FormatError("tensor element count implausibly large");
        }
    }
    const std::size_t expected = 5 + 4 * rank + 4 * static_cast<std::size_t>(count);
    if (buf.size() != expected) {
        throw LengthError("tensor file length " + std::to_string(buf.size()) +
                          " does not match header-implied " + std::to_string(expected));
    }
    tensor.values.resize(static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < tensor.values.size(); ++i) {
        tensor.values[i] = std::bit_cast<float>(detail::get_u32(buf.data() + 5 + 4 * rank + 4 * i));
    }
    return tensor;
}

inline void write_tensor(const std::filesystem::path& path, const TensorData& tensor) {
    const std::vector<std::uint8_t> buf = encode_tensor(tensor);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

inline TensorData read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) {
        throw IoError("cannot open for reading: " + path.string());
    }
    const std::streamsize size = in.tellg();
    in.seekg(0);
    std::vector<std::uint8_t> buf(static_cast<std::size_t>(size));
    if (size > 0) {
        in.read(reinterpret_cast<char*>(buf.data()), size);
    }
    if (!in) {
        throw IoError("read failed: " + path.string());
    }
    return decode_tensor(buf);
}

// --- conversions between TensorData and the domain types ---------------

inline TensorData to_tensor_data(const FeatureMap& f) {
    return TensorData{{f.channels(), f.height(), f.width()}, f.values()};
}

inline TensorData to_tensor_data(const ProbMask& m) {
    return TensorData{{2, m.height(), m.width()}, m.values()};
}

inline TensorData to_tensor_data(const ScoreMap& s) {
    return TensorData{{2, s.height(), s.width()}, s.values()};
}

inline TensorData to_tensor_data(const AffinityMatrix& a) {
    return TensorData{{a.ref_pixels(), a.query_pixels()}, a.values()};
}

inline FeatureMap as_feature_map(const TensorData& t) {
    if (t.dims.size() != 3) {
        throw FormatError("feature map tensor must have rank 3");
    }
    for (float v : t.values) {
        if (!std::isfinite(v)) {
            throw FormatError("feature map tensor holds a non-finite value");
        }
    }
    return FeatureMap(t.dims[0], t.dims[1], t.dims[2], t.values);
}

inline ProbMask as_prob_mask(const TensorData& t) {
    if (t.dims.size() != 3 || t.dims[0] != 2) {
        throw FormatError("mask tensor must have shape 2 x H x W");
    }
    for (float v : t.values) {
        if (!(v >= 0.0f && v <= 1.0f)) {
            throw FormatError("mask tensor holds a value outside [0, 1]");
        }
    }
    return ProbMask(t.dims[1], t.dims[2], t.values);
}

inline ScoreMap as_score_map(const TensorData& t) {
    if (t.dims.size() != 3 || t.dims[0] != 2) {
        throw FormatError("score map tensor must have shape 2 x H x W");
    }
    return ScoreMap(t.dims[1], t.dims[2], t.values);
}

// --- Figure-style grayscale export --------------------------------------

// Writes one channel of a score map as binary PGM (P5, maxval 255). The
// channel is linearly normalized so its minimum maps to 0 and its maximum
// to 255; a constant channel maps to all zeros. Rounding is fixed to
// half-away-from-zero so output bytes are identical across platforms.
inline std::vector<std::uint8_t> encode_score_map_image(const ScoreMap& s, MaskChannel channel) {
    const std::size_t pixels = s.pixel_count();
    float lo = s.channel_flat(channel, 0);
    float hi = lo;
    for (std::size_t i = 1; i < pixels; ++i) {
        const float v = s.channel_flat(channel, i);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const std::string header =
        "P5\n" + std::to_string(s.width()) + " " + std::to_string(s.height()) + "\n255\n";
    std::vector<std::uint8_t> buf(header.begin(), header.end());
    buf.reserve(buf.size() + pixels);
    const double range = static_cast<double>(hi) - static_cast<double>(lo);
    for (std::size_t i = 0; i < pixels; ++i) {
        std::uint8_t byte = 0;
        if (range > 0.0) {
            const double v = (static_cast<double>(s.channel_flat(channel, i)) - lo) / range;
            byte = static_cast<std::uint8_t>(std::lround(255.0 * v));
        }
        buf.push_back(byte);
    }
    return buf;
}

inline void export_score_map_image(const ScoreMap& s, MaskChannel channel,
                                   const std::filesystem::path& path) {
    const std::vector<std::uint8_t> buf = encode_score_map_image(s, channel);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

}  // namespace pixmatch::io

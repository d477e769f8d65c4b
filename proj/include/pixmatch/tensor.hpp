#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pixmatch/error.hpp"

namespace pixmatch {

// Channel index into the two-channel mask and score tensors.
enum class MaskChannel : std::size_t { Background = 0, Foreground = 1 };

// idx = row * width + col. Row/column pairs and flat indices are mutual
// inverses for a fixed width.
inline std::size_t flatten_index(std::size_t row, std::size_t col, std::size_t width) {
    if (width == 0) {
        throw IndexError("flatten_index: width must be positive");
    }
    if (col >= width) {
        std::ostringstream msg;
        msg << "flatten_index: col " << col << " out of range for width " << width;
        throw IndexError(msg.str());
    }
    return row * width + col;
}

inline std::pair<std::size_t, std::size_t> unflatten_index(std::size_t idx, std::size_t width) {
    if (width == 0) {
        throw IndexError("unflatten_index: width must be positive");
    }
    return {idx / width, idx % width};
}

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) {
        throw DimensionError(msg);
    }
}

inline std::string shape3(std::size_t c, std::size_t h, std::size_t w) {
    std::ostringstream s;
    s << c << "x" << h << "x" << w;
    return s.str();
}

}  // namespace detail

// Generic dense tensor used at the serialization boundary and for
// rank-3 results that carry no domain semantics of their own.
// Values are row-major over dims, innermost dimension last.
struct TensorData {
    std::vector<std::size_t> dims;
    std::vector<float> values;

    std::size_t element_count() const {
        std::size_t n = 1;
        for (std::size_t d : dims) n *= d;
        return dims.empty() ? 0 : n;
    }
};

// Dense C x H x W feature map, row-major (channel, row, column).
// An embedded video frame at feature resolution.
class FeatureMap {
public:
    FeatureMap(std::size_t channels, std::size_t height, std::size_t width,
               std::vector<float> data)
        : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
        if (channels_ == 0 || height_ == 0 || width_ == 0) {
            throw DimensionError("FeatureMap: all dimensions must be positive");
        }
        if (data_.size() != channels_ * height_ * width_) {
            throw DimensionError("FeatureMap: data length " + std::to_string(data_.size()) +
                                 " does not match " + detail::shape3(channels_, height_, width_));
        }
    }

    std::size_t channels() const { return channels_; }
    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t pixel_count() const { return height_ * width_; }

    float at(std::size_t c, std::size_t row, std::size_t col) const {
        return data_[(c * height_ + row) * width_ + col];
    }
    // Channel value at a flat pixel index (row-major over the grid).
    float at_flat(std::size_t c, std::size_t pixel) const {
        return data_[c * height_ * width_ + pixel];
    }

    const std::vector<float>& values() const { return data_; }

    // Enforces the finiteness invariant; used when ingesting external data.
    void validate_finite() const {
        for (float v : data_) {
            if (!std::isfinite(v)) {
                throw ParameterError("FeatureMap: non-finite value");
            }
        }
    }

private:
    std::size_t channels_, height_, width_;
    std::vector<float> data_;
};

// Two-channel probability mask, channel 0 = background, channel 1 =
// foreground. Every value must lie in [0, 1]; channel sums are only
// guaranteed near 1 for masks built from hard or area-downsampled
// binary masks.
class ProbMask {
public:
    ProbMask(std::size_t height, std::size_t width, std::vector<float> data)
        : height_(height), width_(width), data_(std::move(data)) {
        if (height_ == 0 || width_ == 0) {
            throw DimensionError("ProbMask: dimensions must be positive");
        }
        if (data_.size() != 2 * height_ * width_) {
            throw DimensionError("ProbMask: data length " + std::to_string(data_.size()) +
                                 " does not match " + detail::shape3(2, height_, width_));
        }
        for (float v : data_) {
            if (!(v >= 0.0f && v <= 1.0f)) {
                throw ParameterError("ProbMask: value outside [0, 1]");
            }
        }
    }

    // Builds a hard binary mask from per-pixel foreground indicators.
    static ProbMask from_foreground(std::size_t height, std::size_t width,
                                    const std::vector<float>& foreground) {
        if (foreground.size() != height * width) {
            throw DimensionError("ProbMask::from_foreground: indicator length mismatch");
        }
        std::vector<float> data(2 * height * width);
        for (std::size_t i = 0; i < foreground.size(); ++i) {
            data[i] = 1.0f - foreground[i];
            data[height * width + i] = foreground[i];
        }
        return ProbMask(height, width, std::move(data));
    }

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t pixel_count() const { return height_ * width_; }

    float background(std::size_t row, std::size_t col) const {
        return data_[row * width_ + col];
    }
    float foreground(std::size_t row, std::size_t col) const {
        return data_[height_ * width_ + row * width_ + col];
    }
    float background_flat(std::size_t pixel) const { return data_[pixel]; }
    float foreground_flat(std::size_t pixel) const { return data_[height_ * width_ + pixel]; }

    const std::vector<float>& values() const { return data_; }

private:
    std::size_t height_, width_;
    std::vector<float> data_;
};

// Pairwise score matrix, one row per reference pixel, one column per
// query pixel, row-major.
class AffinityMatrix {
public:
    AffinityMatrix(std::size_t ref_pixels, std::size_t query_pixels, std::vector<float> data)
        : ref_pixels_(ref_pixels), query_pixels_(query_pixels), data_(std::move(data)) {
        if (ref_pixels_ == 0 || query_pixels_ == 0) {
            throw DimensionError("AffinityMatrix: dimensions must be positive");
        }
        if (data_.size() != ref_pixels_ * query_pixels_) {
            throw DimensionError("AffinityMatrix: data length mismatch");
        }
    }

    std::size_t ref_pixels() const { return ref_pixels_; }
    std::size_t query_pixels() const { return query_pixels_; }

    float at(std::size_t p, std::size_t q) const { return data_[p * query_pixels_ + q]; }

    const std::vector<float>& values() const { return data_; }

private:
    std::size_t ref_pixels_, query_pixels_;
    std::vector<float> data_;
};

// Two-channel matching result for a query frame, channel 0 = background
// score, channel 1 = foreground score.
class ScoreMap {
public:
    ScoreMap(std::size_t height, std::size_t width, std::vector<float> data)
        : height_(height), width_(width), data_(std::move(data)) {
        if (height_ == 0 || width_ == 0) {
            throw DimensionError("ScoreMap: dimensions must be positive");
        }
        if (data_.size() != 2 * height_ * width_) {
            throw DimensionError("ScoreMap: data length mismatch");
        }
    }

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t pixel_count() const { return height_ * width_; }

    float background(std::size_t row, std::size_t col) const {
        return data_[row * width_ + col];
    }
    float foreground(std::size_t row, std::size_t col) const {
        return data_[height_ * width_ + row * width_ + col];
    }
    float background_flat(std::size_t pixel) const { return data_[pixel]; }
    float foreground_flat(std::size_t pixel) const { return data_[height_ * width_ + pixel]; }

    float channel_flat(MaskChannel ch, std::size_t pixel) const {
        return data_[static_cast<std::size_t>(ch) * height_ * width_ + pixel];
    }

    const std::vector<float>& values() const { return data_; }

private:
    std::size_t height_, width_;
    std::vector<float> data_;
};

// Input norms below this threshold normalize to the zero vector instead
// of dividing by a denormal; downstream similarity then sits at the
// neutral midpoint 0.5.
inline constexpr double kNormalizationEpsilon = 1e-12;

// Scales every pixel's channel vector to Euclidean norm 1. Norm is
// accumulated in double, left to right over channels.
inline FeatureMap l2_normalize_channels(const FeatureMap& f) {
    const std::size_t channels = f.channels();
    const std::size_t pixels = f.pixel_count();
    std::vector<float> out(f.values().size());
    for (std::size_t pix = 0; pix < pixels; ++pix) {
        double ss = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
            const double v = f.at_flat(c, pix);
            ss += v * v;
        }
        const double norm = std::sqrt(ss);
        if (norm < kNormalizationEpsilon) {
            for (std::size_t c = 0; c < channels; ++c) {
                out[c * pixels + pix] = 0.0f;
            }
        } else {
            for (std::size_t c = 0; c < channels; ++c) {
                out[c * pixels + pix] = static_cast<float>(f.at_flat(c, pix) / norm);
            }
        }
    }
    return FeatureMap(channels, f.height(), f.width(), std::move(out));
}

// Area downsampling: each output pixel is the arithmetic mean of its
// factor x factor input block, per channel. Preserves the probability
// semantics of the mask.
inline ProbMask downsample_mask(const ProbMask& m, std::size_t factor) {
    if (factor == 0) {
        throw ParameterError("downsample_mask: factor must be positive");
    }
    if (m.height() % factor != 0 || m.width() % factor != 0) {
        std::ostringstream msg;
        msg << "downsample_mask: dimensions " << m.height() << "x" << m.width()
            << " not divisible by factor " << factor;
        throw DimensionError(msg.str());
    }
    const std::size_t oh = m.height() / factor;
    const std::size_t ow = m.width() / factor;
    const double inv_block = 1.0 / static_cast<double>(factor * factor);
    std::vector<float> out(2 * oh * ow);
    for (std::size_t ch = 0; ch < 2; ++ch) {
        for (std::size_t r = 0; r < oh; ++r) {
            for (std::size_t c = 0; c < ow; ++c) {
                double sum = 0.0;
                for (std::size_t br = 0; br < factor; ++br) {
                    for (std::size_t bc = 0; bc < factor; ++bc) {
                        const std::size_t ir = r * factor + br;
                        const std::size_t ic = c * factor + bc;
                        sum += ch == 0 ? m.background(ir, ic) : m.foreground(ir, ic);
                    }
                }
                out[ch * oh * ow + r * ow + c] = static_cast<float>(sum * inv_block);
            }
        }
    }
    return ProbMask(oh, ow, std::move(out));
}

}  // namespace pixmatch

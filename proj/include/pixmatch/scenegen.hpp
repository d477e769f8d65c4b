#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "pixmatch/error.hpp"
#include "pixmatch/tensor.hpp"

// Synthetic feature-map/mask scenes. Everything here is a pure function
// of its seed: the generator algorithms are fixed and documented so that
// scenes reproduce bit-exactly across runs, platforms, and independent
// reimplementations.
namespace pixmatch::scenegen {

// SplitMix64 (Steele, Lea, Vigna): a 64-bit counter-based generator with
// a fixed output permutation. Chosen as the scene PRNG because the whole
// algorithm fits in four lines and is trivially portable.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1): top 53 bits scaled by 2^-53.
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Uniform in [0, n). Plain modulo; the bias is immaterial for the
    // grid sizes used here and keeps the procedure trivial to restate.
    std::uint64_t next_below(std::uint64_t n) {
        return next() % n;
    }

private:
    std::uint64_t state_;
};

// Standard normal draws via the Box-Muller transform:
//   u1 = 1 - U, u2 = U, r = sqrt(-2 ln u1),
//   z0 = r cos(2 pi u2), z1 = r sin(2 pi u2),
// consuming two uniforms per pair and returning z0 before z1.
class NormalSampler {
public:
    explicit NormalSampler(SplitMix64& rng) : rng_(rng) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - rng_.next_double();  // (0, 1], keeps log finite
        const double u2 = rng_.next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    SplitMix64& rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Magnitude of the target feature shared by the reference foreground
// pixel and every distractor copy. Raw dot products grow with feature
// magnitude, so this sets how sharply the equalized softmax reacts; 4
// dominates the near-orthogonal background without saturating.
inline constexpr double kForegroundMagnitude = 4.0;

// Magnitude of the true-foreground query pixel. Strictly larger than the
// copies so the genuine location stays the dominant raw match and
// foreground margins are strict rather than degenerate ties.
inline constexpr double kTrueForegroundMagnitude = 5.0;

// Background features are rejection-sampled until their cosine against
// the target direction is below this, so the distractor copies, not
// random background, are always the hardest negatives.
inline constexpr double kMaxBackgroundCosine = 0.3;

inline constexpr int kMaxRejectionDraws = 10000;

struct DistractorScene {
    FeatureMap ref;
    ProbMask ref_mask;
    FeatureMap query;
    std::vector<std::size_t> fg_query_pixels;     // true foreground locations
    std::vector<std::size_t> distractor_pixels;   // background pixels cloning the target feature
    std::size_t n_copies = 0;
};

struct RandomScene {
    FeatureMap ref;
    ProbMask ref_mask;
    FeatureMap query;
};

namespace detail {

// First k elements of a partial Fisher-Yates shuffle over [0, n).
inline std::vector<std::size_t> sample_distinct(SplitMix64& rng, std::size_t k, std::size_t n) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

inline std::vector<double> draw_unit_vector(NormalSampler& normal, std::size_t channels) {
    for (int attempt = 0; attempt < kMaxRejectionDraws; ++attempt) {
        std::vector<double> v(channels);
        double ss = 0.0;
        for (double& x : v) {
            x = normal.next();
            ss += x * x;
        }
        const double norm = std::sqrt(ss);
        if (norm < 1e-9) continue;
        for (double& x : v) x /= norm;
        return v;
    }
    throw GenerationError("draw_unit_vector: degenerate draws exhausted the retry budget");
}

// Unit vector with |cosine| below kMaxBackgroundCosine against `target`.
inline std::vector<double> draw_background_direction(NormalSampler& normal,
                                                     const std::vector<double>& target) {
    for (int attempt = 0; attempt < kMaxRejectionDraws; ++attempt) {
        std::vector<double> v = draw_unit_vector(normal, target.size());
        double cosine = 0.0;
        for (std::size_t c = 0; c < v.size(); ++c) cosine += v[c] * target[c];
        if (std::abs(cosine) < kMaxBackgroundCosine) {
            return v;
        }
    }
    throw GenerationError(
        "make_distractor_scene: could not sample a near-orthogonal background feature "
        "after 10000 draws; raise channels");
}

inline void write_pixel(std::vector<float>& data, std::size_t pixels, std::size_t pixel,
                        const std::vector<double>& feature, double scale) {
    for (std::size_t c = 0; c < feature.size(); ++c) {
        data[c * pixels + pixel] = static_cast<float>(scale * feature[c]);
    }
}

}  // namespace detail

// A reference frame holding one foreground pixel with a strong target
// feature, and a query frame where that exact feature reappears at
// n_copies background locations (the distractors) next to one
// slightly-stronger true-foreground pixel. Deterministic in seed.
// Draw order, all from one SplitMix64 stream: target direction, reference
// foreground position, reference background features in flat-pixel order,
// query positions, query background features in flat-pixel order.
inline DistractorScene make_distractor_scene(std::size_t grid, std::size_t channels,
                                             std::size_t n_copies, std::uint64_t seed) {
    if (grid < 2) {
        throw ParameterError("make_distractor_scene: grid must be >= 2");
    }
    if (channels == 0) {
        throw ParameterError("make_distractor_scene: channels must be >= 1");
    }
    if (n_copies < 1) {
        throw ParameterError("make_distractor_scene: n_copies must be >= 1");
    }
    const std::size_t pixels = grid * grid;
    if (n_copies + 1 > pixels) {
        throw ParameterError("make_distractor_scene: n_copies + 1 exceeds the query grid");
    }

    SplitMix64 rng(seed);
    NormalSampler normal(rng);

    const std::vector<double> target = detail::draw_unit_vector(normal, channels);

    // Reference: one foreground pixel carrying the target feature.
    const std::size_t ref_fg = static_cast<std::size_t>(rng.next_below(pixels));
    std::vector<float> ref_data(channels * pixels);
    std::vector<float> fg_indicator(pixels, 0.0f);
    fg_indicator[ref_fg] = 1.0f;
    for (std::size_t pix = 0; pix < pixels; ++pix) {
        if (pix == ref_fg) {
            detail::write_pixel(ref_data, pixels, pix, target, kForegroundMagnitude);
        } else {
            detail::write_pixel(ref_data, pixels, pix,
                                detail::draw_background_direction(normal, target), 1.0);
        }
    }

    // Query: true foreground plus the distractor copies, background elsewhere.
    std::vector<std::size_t> spots = detail::sample_distinct(rng, n_copies + 1, pixels);
    const std::size_t true_fg = spots[0];
    std::vector<std::size_t> distractors(spots.begin() + 1, spots.end());
    std::sort(distractors.begin(), distractors.end());

    std::vector<float> query_data(channels * pixels);
    detail::write_pixel(query_data, pixels, true_fg, target, kTrueForegroundMagnitude);
    for (std::size_t d : distractors) {
        // Bit-exact clones of the reference foreground feature.
        for (std::size_t c = 0; c < channels; ++c) {
            query_data[c * pixels + d] = ref_data[c * pixels + ref_fg];
        }
    }
    for (std::size_t pix = 0; pix < pixels; ++pix) {
        if (pix == true_fg) continue;
        if (std::find(distractors.begin(), distractors.end(), pix) != distractors.end()) continue;
        detail::write_pixel(query_data, pixels, pix,
                            detail::draw_background_direction(normal, target), 1.0);
    }

    return DistractorScene{
        FeatureMap(channels, grid, grid, std::move(ref_data)),
        ProbMask::from_foreground(grid, grid, fg_indicator),
        FeatureMap(channels, grid, grid, std::move(query_data)),
        {true_fg},
        std::move(distractors),
        n_copies,
    };
}

// Fuzzing input: standard-normal features for both frames and a random
// hard binary mask. When the reference grid has at least two pixels the
// mask always contains both classes; a single-pixel reference is all
// foreground. Draw order: reference features, query features, foreground
// pixel count, foreground positions.
inline RandomScene make_random_scene(std::size_t grid_ref, std::size_t grid_query,
                                     std::size_t channels, std::uint64_t seed) {
    if (grid_ref == 0 || grid_query == 0 || channels == 0) {
        throw ParameterError("make_random_scene: all parameters must be positive");
    }
    SplitMix64 rng(seed);
    NormalSampler normal(rng);

    const std::size_t rp = grid_ref * grid_ref;
    const std::size_t qp = grid_query * grid_query;
    std::vector<float> ref_data(channels * rp);
    for (float& v : ref_data) v = static_cast<float>(normal.next());
    std::vector<float> query_data(channels * qp);
    for (float& v : query_data) v = static_cast<float>(normal.next());

    std::vector<float> fg_indicator(rp, 0.0f);
    if (rp == 1) {
        fg_indicator[0] = 1.0f;
    } else {
        const std::size_t n_fg = 1 + static_cast<std::size_t>(rng.next_below(rp - 1));
        for (std::size_t pos : detail::sample_distinct(rng, n_fg, rp)) {
            fg_indicator[pos] = 1.0f;
        }
    }

    return RandomScene{
        FeatureMap(channels, grid_ref, grid_ref, std::move(ref_data)),
        ProbMask::from_foreground(grid_ref, grid_ref, fg_indicator),
        FeatureMap(channels, grid_query, grid_query, std::move(query_data)),
    };
}

}  // namespace pixmatch::scenegen

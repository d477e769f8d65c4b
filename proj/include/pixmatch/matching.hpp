#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>
#include <utility>
#include <vector>

#include "pixmatch/error.hpp"
#include "pixmatch/tensor.hpp"

namespace pixmatch {

// The four pixel-level matching mechanisms.
enum class Mechanism { Surjective, BijectiveKernel, BijectiveTopK, Equalized };

inline const char* mechanism_name(Mechanism m) {
    switch (m) {
        case Mechanism::Surjective: return "surjective";
        case Mechanism::BijectiveKernel: return "kernel";
        case Mechanism::BijectiveTopK: return "topk";
        case Mechanism::Equalized: return "equalized";
    }
    return "unknown";
}

// Mechanism selector plus the per-reference hyper-parameters. Only the
// parameter matching the mechanism is meaningful; the other is ignored.
// Defaults are the best-performing settings for matching against the
// initial reference frame; previous_frame_defaults() swaps in the
// settings tuned for the previous adjacent frame.
struct MatchConfig {
    Mechanism mechanism = Mechanism::Surjective;
    double kernel_sigma = 32.0;  // BijectiveKernel only, pixels
    std::size_t top_k = 128;     // BijectiveTopK only, query pixels kept per reference pixel

    static MatchConfig initial_frame_defaults(Mechanism m) {
        return MatchConfig{m, 32.0, 128};
    }
    static MatchConfig previous_frame_defaults(Mechanism m) {
        return MatchConfig{m, 32.0, 16};
    }
};

namespace detail {

// Row blocks are handed out through an atomic counter rather than split
// statically, so slow or throttled workers do not stall the join. Every
// index is processed by exactly one worker and each per-index computation
// is self-contained, so results are bitwise independent of both the
// partitioning and the thread count.
inline constexpr std::size_t kRowBlock = 8;

template <typename Fn>
void parallel_blocks(std::size_t count, int threads, Fn&& fn) {
    if (threads < 1) {
        throw ParameterError("thread count must be >= 1");
    }
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(threads), count == 0 ? 1 : count);
    if (workers <= 1) {
        if (count > 0) fn(std::size_t{0}, count);
        return;
    }
    std::atomic<std::size_t> cursor{0};
    auto drain = [&cursor, count, &fn] {
        for (;;) {
            const std::size_t begin = cursor.fetch_add(kRowBlock, std::memory_order_relaxed);
            if (begin >= count) break;
            fn(begin, std::min(count, begin + kRowBlock));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        pool.emplace_back(drain);
    }
    drain();
    for (auto& t : pool) t.join();
}

// Repacks (channel, row, col) storage into one contiguous channel vector
// per pixel. Pure copy; channel order is preserved so dot products see
// the same summation order as a strided walk.
inline std::vector<float> pixel_major(const FeatureMap& f) {
    const std::size_t channels = f.channels();
    const std::size_t pixels = f.pixel_count();
    std::vector<float> packed(channels * pixels);
    const float* src = f.values().data();
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t pix = 0; pix < pixels; ++pix) {
            packed[pix * channels + c] = src[c * pixels + pix];
        }
    }
    return packed;
}

// pixel_major with optional channel L2 normalization folded into the same
// pass. Arithmetic is identical to l2_normalize_channels followed by
// pixel_major; per-pixel work is independent, so it parallelizes.
inline std::vector<float> pixel_major_packed(const FeatureMap& f, bool normalize, int threads) {
    const std::size_t channels = f.channels();
    const std::size_t pixels = f.pixel_count();
    std::vector<float> packed(channels * pixels);
    const float* src = f.values().data();
    parallel_blocks(pixels, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t pix = begin; pix < end; ++pix) {
            float* dst = packed.data() + pix * channels;
            if (!normalize) {
                for (std::size_t c = 0; c < channels; ++c) dst[c] = src[c * pixels + pix];
                continue;
            }
            double ss = 0.0;
            for (std::size_t c = 0; c < channels; ++c) {
                const double v = src[c * pixels + pix];
                ss += v * v;
            }
            const double norm = std::sqrt(ss);
            if (norm < kNormalizationEpsilon) {
                for (std::size_t c = 0; c < channels; ++c) dst[c] = 0.0f;
            } else {
                for (std::size_t c = 0; c < channels; ++c) {
                    dst[c] = static_cast<float>(src[c * pixels + pix] / norm);
                }
            }
        }
    });
    return packed;
}

// Serial left-to-right accumulation in double. The fixed per-entry order
// keeps results identical across thread counts, iteration orders, and the
// reference-oracle path.
inline double dot(const float* a, const float* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return acc;
}

inline float surjective_score(double dot_value) {
    return static_cast<float>(std::clamp(0.5 * (dot_value + 1.0), 0.0, 1.0));
}

// One reference row of rescaled cosine scores against all query pixels.
// Four query columns run in parallel accumulator chains to hide the
// double-add latency; each entry still accumulates channels left to
// right, so values are bit-identical to one dot() per entry.
inline void surjective_row(const float* ref_pixel, const float* query, std::size_t channels,
                           std::size_t query_pixels, float* out) {
    std::size_t q = 0;
    for (; q + 4 <= query_pixels; q += 4) {
        const float* b0 = query + q * channels;
        const float* b1 = b0 + channels;
        const float* b2 = b1 + channels;
        const float* b3 = b2 + channels;
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
            const double a = ref_pixel[c];
            s0 += a * static_cast<double>(b0[c]);
            s1 += a * static_cast<double>(b1[c]);
            s2 += a * static_cast<double>(b2[c]);
            s3 += a * static_cast<double>(b3[c]);
        }
        out[q] = surjective_score(s0);
        out[q + 1] = surjective_score(s1);
        out[q + 2] = surjective_score(s2);
        out[q + 3] = surjective_score(s3);
    }
    for (; q < query_pixels; ++q) {
        out[q] = surjective_score(dot(ref_pixel, query + q * channels, channels));
    }
}

// One reference row of raw dot products, same accumulator layout.
inline void raw_dot_row(const float* ref_pixel, const float* query, std::size_t channels,
                        std::size_t query_pixels, double* out) {
    std::size_t q = 0;
    for (; q + 4 <= query_pixels; q += 4) {
        const float* b0 = query + q * channels;
        const float* b1 = b0 + channels;
        const float* b2 = b1 + channels;
        const float* b3 = b2 + channels;
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
            const double a = ref_pixel[c];
            s0 += a * static_cast<double>(b0[c]);
            s1 += a * static_cast<double>(b1[c]);
            s2 += a * static_cast<double>(b2[c]);
            s3 += a * static_cast<double>(b3[c]);
        }
        out[q] = s0;
        out[q + 1] = s1;
        out[q + 2] = s2;
        out[q + 3] = s3;
    }
    for (; q < query_pixels; ++q) {
        out[q] = dot(ref_pixel, query + q * channels, channels);
    }
}

// Numerically stable softmax of one raw row: subtract the row maximum,
// exponentiate, divide by the left-to-right sum.
inline void softmax_from_raw(const double* raw, std::size_t n, float* out) {
    double row_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) row_max = std::max(row_max, raw[i]);
    double denom = 0.0;
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) {
        e[i] = std::exp(raw[i] - row_max);
        denom += e[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = static_cast<float>(e[i] / denom);
    }
}

// exp(-d^2 / (2 sigma^2)) for every integer squared distance on the grid.
inline std::vector<double> kernel_weight_table(std::size_t query_h, std::size_t query_w,
                                               double sigma) {
    const std::size_t max_d2 = (query_h - 1) * (query_h - 1) + (query_w - 1) * (query_w - 1);
    std::vector<double> weight(max_d2 + 1);
    for (std::size_t d2 = 0; d2 <= max_d2; ++d2) {
        weight[d2] = std::exp(-static_cast<double>(d2) / (2.0 * sigma * sigma));
    }
    return weight;
}

// In-place Gaussian damping of one row around its argmax (ties toward
// the smallest flat index).
inline void kernel_filter_row(float* row, std::size_t query_pixels, std::size_t query_w,
                              const std::vector<double>& weight) {
    std::size_t best = 0;
    for (std::size_t q = 1; q < query_pixels; ++q) {
        if (row[q] > row[best]) best = q;
    }
    const std::size_t br = best / query_w;
    const std::size_t bc = best % query_w;
    for (std::size_t q = 0; q < query_pixels; ++q) {
        const std::size_t qr = q / query_w;
        const std::size_t qc = q % query_w;
        const std::size_t dr = qr > br ? qr - br : br - qr;
        const std::size_t dc = qc > bc ? qc - bc : bc - qc;
        row[q] = static_cast<float>(static_cast<double>(row[q]) * weight[dr * dr + dc * dc]);
    }
}

// Keeps the k largest entries of src in dst and zeroes the rest. Ties at
// the cut rank break toward the smallest flat index. `order` is caller
// scratch of size query_pixels.
inline void topk_filter_row(const float* src, float* dst, std::size_t query_pixels, std::size_t k,
                            std::vector<std::size_t>& order) {
    if (k >= query_pixels) {
        std::copy(src, src + query_pixels, dst);
        return;
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [src](std::size_t a, std::size_t b) {
                          if (src[a] != src[b]) return src[a] > src[b];
                          return a < b;
                      });
    std::fill(dst, dst + query_pixels, 0.0f);
    for (std::size_t i = 0; i < k; ++i) {
        dst[order[i]] = src[order[i]];
    }
}

inline void require_same_channels(const FeatureMap& ref, const FeatureMap& query) {
    if (ref.channels() != query.channels()) {
        throw DimensionError("channel mismatch: reference has " +
                             std::to_string(ref.channels()) + ", query has " +
                             std::to_string(query.channels()));
    }
}

}  // namespace detail

// Linearly rescaled cosine similarity between every reference pixel p and
// query pixel q: (<N(ref_p), N(query_q)> + 1) / 2 with channel L2
// normalization N. Every entry lies in [0, 1].
inline AffinityMatrix affinity_surjective(const FeatureMap& ref, const FeatureMap& query,
                                          int threads = 1) {
    detail::require_same_channels(ref, query);
    const std::size_t channels = ref.channels();
    const std::size_t rp = ref.pixel_count();
    const std::size_t qp = query.pixel_count();

    const std::vector<float> nref = detail::pixel_major(l2_normalize_channels(ref));
    const std::vector<float> nquery = detail::pixel_major(l2_normalize_channels(query));

    std::vector<float> out(rp * qp);
    detail::parallel_blocks(rp, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            detail::surjective_row(nref.data() + p * channels, nquery.data(), channels, qp,
                                   out.data() + p * qp);
        }
    });
    return AffinityMatrix(rp, qp, std::move(out));
}

// Raw dot-product similarity (unnormalized features, no temperature)
// followed by a per-reference-row softmax over the query dimension. The
// softmax subtracts the row maximum before exponentiating; every row sums
// to 1 and forces each reference pixel to contribute equal total mass.
inline AffinityMatrix affinity_equalized(const FeatureMap& ref, const FeatureMap& query,
                                         int threads = 1) {
    detail::require_same_channels(ref, query);
    const std::size_t channels = ref.channels();
    const std::size_t rp = ref.pixel_count();
    const std::size_t qp = query.pixel_count();

    const std::vector<float> pref = detail::pixel_major(ref);
    const std::vector<float> pquery = detail::pixel_major(query);

    std::vector<float> out(rp * qp);
    detail::parallel_blocks(rp, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> raw(qp);
        for (std::size_t p = begin; p < end; ++p) {
            detail::raw_dot_row(pref.data() + p * channels, pquery.data(), channels, qp,
                                raw.data());
            detail::softmax_from_raw(raw.data(), qp, out.data() + p * qp);
        }
    });
    return AffinityMatrix(rp, qp, std::move(out));
}

// Scales row p of the affinity by reference pixel p's background and
// foreground probabilities, broadcast across the query dimension.
// Returns (A_BG, A_FG).
inline std::pair<AffinityMatrix, AffinityMatrix> embed_mask(const AffinityMatrix& a,
                                                            const ProbMask& ref_mask,
                                                            int threads = 1) {
    if (ref_mask.pixel_count() != a.ref_pixels()) {
        throw DimensionError("embed_mask: mask grid " + std::to_string(ref_mask.height()) + "x" +
                             std::to_string(ref_mask.width()) + " does not cover " +
                             std::to_string(a.ref_pixels()) + " reference pixels");
    }
    const std::size_t rp = a.ref_pixels();
    const std::size_t qp = a.query_pixels();
    std::vector<float> bg(rp * qp);
    std::vector<float> fg(rp * qp);
    const float* src = a.values().data();
    detail::parallel_blocks(rp, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            const float wb = ref_mask.background_flat(p);
            const float wf = ref_mask.foreground_flat(p);
            const float* row = src + p * qp;
            float* rb = bg.data() + p * qp;
            float* rf = fg.data() + p * qp;
            for (std::size_t q = 0; q < qp; ++q) {
                rb[q] = row[q] * wb;
                rf[q] = row[q] * wf;
            }
        }
    });
    return {AffinityMatrix(rp, qp, std::move(bg)), AffinityMatrix(rp, qp, std::move(fg))};
}

// Per-query-pixel maximum over all reference pixels, stacked as
// (background, foreground) channels.
inline ScoreMap query_wise_max(const AffinityMatrix& a_bg, const AffinityMatrix& a_fg,
                               std::size_t query_h, std::size_t query_w, int threads = 1) {
    if (a_bg.ref_pixels() != a_fg.ref_pixels() || a_bg.query_pixels() != a_fg.query_pixels()) {
        throw DimensionError("query_wise_max: matrix shapes differ");
    }
    if (query_h * query_w != a_bg.query_pixels()) {
        throw DimensionError("query_wise_max: grid " + std::to_string(query_h) + "x" +
                             std::to_string(query_w) + " does not cover " +
                             std::to_string(a_bg.query_pixels()) + " query pixels");
    }
    const std::size_t rp = a_bg.ref_pixels();
    const std::size_t qp = a_bg.query_pixels();
    const float* bg = a_bg.values().data();
    const float* fg = a_fg.values().data();
    std::vector<float> out(2 * qp);
    // Partitioned over query columns; the reduction over reference rows is
    // a plain max, so the result does not depend on the visit order.
    detail::parallel_blocks(qp, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t q = begin; q < end; ++q) {
            out[q] = bg[q];
            out[qp + q] = fg[q];
        }
        for (std::size_t p = 1; p < rp; ++p) {
            const float* rb = bg + p * qp;
            const float* rf = fg + p * qp;
            for (std::size_t q = begin; q < end; ++q) {
                out[q] = std::max(out[q], rb[q]);
                out[qp + q] = std::max(out[qp + q], rf[q]);
            }
        }
    });
    return ScoreMap(query_h, query_w, std::move(out));
}

// Gaussian filtering of a class-embodied affinity matrix: each reference
// row is damped by exp(-d(q, q*)^2 / (2 sigma^2)) around its best-matching
// query pixel q*, with d the Euclidean distance in query-grid pixel
// coordinates. Argmax ties break toward the smallest flat index.
inline AffinityMatrix kernel_filter(const AffinityMatrix& b, std::size_t query_h,
                                    std::size_t query_w, double sigma, int threads = 1) {
    if (!(sigma > 0.0)) {
        throw ParameterError("kernel_filter: sigma must be positive");
    }
    if (query_h * query_w != b.query_pixels()) {
        throw DimensionError("kernel_filter: grid does not cover the query pixels");
    }
    const std::size_t rp = b.ref_pixels();
    const std::size_t qp = b.query_pixels();
    const std::vector<double> weight = detail::kernel_weight_table(query_h, query_w, sigma);
    std::vector<float> out(b.values());
    detail::parallel_blocks(rp, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            detail::kernel_filter_row(out.data() + p * qp, qp, query_w, weight);
        }
    });
    return AffinityMatrix(rp, qp, std::move(out));
}

// Top-K filtering of a class-embodied affinity matrix: each reference row
// keeps its k largest entries and zeroes the rest. Ties at the k-th value
// break toward the smallest flat index. Rows are unchanged when
// k >= query_pixels.
inline AffinityMatrix topk_filter(const AffinityMatrix& b, std::size_t k, int threads = 1) {
    if (k == 0) {
        throw ParameterError("topk_filter: k must be >= 1");
    }
    const std::size_t rp = b.ref_pixels();
    const std::size_t qp = b.query_pixels();
    if (k >= qp) {
        return b;
    }
    const float* src = b.values().data();
    std::vector<float> out(rp * qp);
    detail::parallel_blocks(rp, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<std::size_t> order(qp);
        for (std::size_t p = begin; p < end; ++p) {
            detail::topk_filter_row(src + p * qp, out.data() + p * qp, qp, k, order);
        }
    });
    return AffinityMatrix(rp, qp, std::move(out));
}

// Full pipeline from feature maps and a reference mask to the query-frame
// score map:
//   Surjective:      affinity_surjective -> embed_mask -> query_wise_max
//   BijectiveKernel: ... -> kernel_filter on A_BG and A_FG -> query_wise_max
//   BijectiveTopK:   ... -> topk_filter on A_BG and A_FG -> query_wise_max
//   Equalized:       affinity_equalized -> embed_mask -> query_wise_max
//
// This entry point fuses the stages row by row instead of materializing
// the intermediate matrices: every filter is row-local and the query-wise
// maximum is an order-free reduction, so the result is bit-identical to
// running the staged operations above while touching a fraction of the
// memory. Work is distributed over reference rows through the same
// dynamic block scheme as the staged operations.
inline ScoreMap match(const FeatureMap& ref, const ProbMask& ref_mask, const FeatureMap& query,
                      const MatchConfig& cfg, int threads = 1) {
    detail::require_same_channels(ref, query);
    if (ref_mask.pixel_count() != ref.pixel_count() || ref_mask.height() != ref.height() ||
        ref_mask.width() != ref.width()) {
        throw DimensionError("match: mask grid does not match the reference feature grid");
    }
    if (threads < 1) {
        throw ParameterError("thread count must be >= 1");
    }
    if (cfg.mechanism == Mechanism::BijectiveKernel && !(cfg.kernel_sigma > 0.0)) {
        throw ParameterError("match: kernel_sigma must be positive");
    }
    if (cfg.mechanism == Mechanism::BijectiveTopK && cfg.top_k == 0) {
        throw ParameterError("match: top_k must be >= 1");
    }

    const std::size_t channels = ref.channels();
    const std::size_t rp = ref.pixel_count();
    const std::size_t qp = query.pixel_count();
    const bool equalized = cfg.mechanism == Mechanism::Equalized;

    // Packing is a sub-millisecond pass; threading it costs more than it saves.
    const std::vector<float> pref = detail::pixel_major_packed(ref, !equalized, 1);
    const std::vector<float> pquery = detail::pixel_major_packed(query, !equalized, 1);

    std::vector<double> weight;
    if (cfg.mechanism == Mechanism::BijectiveKernel) {
        weight = detail::kernel_weight_table(query.height(), query.width(), cfg.kernel_sigma);
    }

    std::vector<float> best_bg(qp, -std::numeric_limits<float>::infinity());
    std::vector<float> best_fg(qp, -std::numeric_limits<float>::infinity());
    std::mutex merge_mutex;
    std::atomic<std::size_t> cursor{0};

    // Rows unchanged when k covers the whole grid, as in the staged filter.
    const bool topk_active = cfg.mechanism == Mechanism::BijectiveTopK && cfg.top_k < qp;

    auto worker = [&] {
        std::vector<float> row(qp);
        std::vector<float> bg_row(qp);
        std::vector<float> fg_row(qp);
        std::vector<double> raw;
        std::vector<std::size_t> order;
        std::vector<float> bg_kept, fg_kept;
        if (equalized) raw.resize(qp);
        if (topk_active) {
            order.resize(qp);
            bg_kept.resize(qp);
            fg_kept.resize(qp);
        }
        std::vector<float> local_bg(qp, -std::numeric_limits<float>::infinity());
        std::vector<float> local_fg(qp, -std::numeric_limits<float>::infinity());
        bool touched = false;

        for (;;) {
            const std::size_t begin = cursor.fetch_add(detail::kRowBlock, std::memory_order_relaxed);
            if (begin >= rp) break;
            const std::size_t end = std::min(rp, begin + detail::kRowBlock);
            touched = true;
            for (std::size_t p = begin; p < end; ++p) {
                const float* ref_pixel = pref.data() + p * channels;
                if (equalized) {
                    detail::raw_dot_row(ref_pixel, pquery.data(), channels, qp, raw.data());
                    detail::softmax_from_raw(raw.data(), qp, row.data());
                } else {
                    detail::surjective_row(ref_pixel, pquery.data(), channels, qp, row.data());
                }

                const float wb = ref_mask.background_flat(p);
                const float wf = ref_mask.foreground_flat(p);
                for (std::size_t q = 0; q < qp; ++q) {
                    bg_row[q] = row[q] * wb;
                    fg_row[q] = row[q] * wf;
                }

                // Filters act on the class-embodied rows, one per class.
                const float* fold_bg = bg_row.data();
                const float* fold_fg = fg_row.data();
                if (cfg.mechanism == Mechanism::BijectiveKernel) {
                    detail::kernel_filter_row(bg_row.data(), qp, query.width(), weight);
                    detail::kernel_filter_row(fg_row.data(), qp, query.width(), weight);
                } else if (topk_active) {
                    detail::topk_filter_row(bg_row.data(), bg_kept.data(), qp, cfg.top_k, order);
                    detail::topk_filter_row(fg_row.data(), fg_kept.data(), qp, cfg.top_k, order);
                    fold_bg = bg_kept.data();
                    fold_fg = fg_kept.data();
                }

                for (std::size_t q = 0; q < qp; ++q) {
                    local_bg[q] = std::max(local_bg[q], fold_bg[q]);
                    local_fg[q] = std::max(local_fg[q], fold_fg[q]);
                }
            }
        }
        if (touched) {
            const std::scoped_lock lock(merge_mutex);
            for (std::size_t q = 0; q < qp; ++q) {
                best_bg[q] = std::max(best_bg[q], local_bg[q]);
                best_fg[q] = std::max(best_fg[q], local_fg[q]);
            }
        }
    };

    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), rp);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers - 1);
        for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
    }

    std::vector<float> out(2 * qp);
    std::copy(best_bg.begin(), best_bg.end(), out.begin());
    std::copy(best_fg.begin(), best_fg.end(), out.begin() + qp);
    return ScoreMap(query.height(), query.width(), std::move(out));
}

// Stacks the score maps from the initial and previous reference frames
// into a 4 x H x W tensor ordered (initial-BG, initial-FG, previous-BG,
// previous-FG).
inline TensorData assemble_score_maps(const ScoreMap& initial, const ScoreMap& previous) {
    if (initial.height() != previous.height() || initial.width() != previous.width()) {
        throw DimensionError("assemble_score_maps: spatial dimensions differ");
    }
    TensorData t;
    t.dims = {4, initial.height(), initial.width()};
    t.values.reserve(4 * initial.pixel_count());
    t.values.insert(t.values.end(), initial.values().begin(), initial.values().end());
    t.values.insert(t.values.end(), previous.values().begin(), previous.values().end());
    return t;
}

}  // namespace pixmatch

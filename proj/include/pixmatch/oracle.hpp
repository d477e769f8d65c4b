#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "pixmatch/matching.hpp"
#include "pixmatch/tensor.hpp"

// Deliberately naive, loop-based reference implementations of every
// matching stage. Strictly single-threaded, no blocking, no repacking;
// used as the independent ground truth for equivalence testing. Shares
// the production tie-breaking rules (argmax and top-K ties toward the
// smallest flat index) and per-entry accumulation precision so that
// discrete selections are exact and any disagreement signals a logic
// bug rather than floating-point reordering.
namespace pixmatch::oracle {

// Softmax with max-subtraction: exp(x_j - max) / sum exp(x_l - max),
// summed in a fixed left-to-right order.
inline std::vector<double> softmax_row(const std::vector<double>& row) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : row) m = std::max(m, v);
    std::vector<double> out(row.size());
    double denom = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        out[i] = std::exp(row[i] - m);
        denom += out[i];
    }
    for (double& v : out) v /= denom;
    return out;
}

inline FeatureMap l2_normalize_channels(const FeatureMap& f) {
    std::vector<float> out(f.values().size());
    for (std::size_t r = 0; r < f.height(); ++r) {
        for (std::size_t c = 0; c < f.width(); ++c) {
            double ss = 0.0;
            for (std::size_t ch = 0; ch < f.channels(); ++ch) {
                const double v = f.at(ch, r, c);
                ss += v * v;
            }
            const double norm = std::sqrt(ss);
            for (std::size_t ch = 0; ch < f.channels(); ++ch) {
                const std::size_t idx = (ch * f.height() + r) * f.width() + c;
                out[idx] = norm < kNormalizationEpsilon
                               ? 0.0f
                               : static_cast<float>(f.at(ch, r, c) / norm);
            }
        }
    }
    return FeatureMap(f.channels(), f.height(), f.width(), std::move(out));
}

inline AffinityMatrix affinity_surjective(const FeatureMap& ref, const FeatureMap& query) {
    detail::require_same_channels(ref, query);
    const FeatureMap nref = l2_normalize_channels(ref);
    const FeatureMap nquery = l2_normalize_channels(query);
    const std::size_t rp = ref.pixel_count();
    const std::size_t qp = query.pixel_count();
    std::vector<float> out(rp * qp);
    for (std::size_t p = 0; p < rp; ++p) {
        for (std::size_t q = 0; q < qp; ++q) {
            double dot = 0.0;
            for (std::size_t ch = 0; ch < ref.channels(); ++ch) {
                dot += static_cast<double>(nref.at_flat(ch, p)) *
                       static_cast<double>(nquery.at_flat(ch, q));
            }
            const double sim = 0.5 * (dot + 1.0);
            out[p * qp + q] = static_cast<float>(std::clamp(sim, 0.0, 1.0));
        }
    }
    return AffinityMatrix(rp, qp, std::move(out));
}

inline AffinityMatrix affinity_equalized(const FeatureMap& ref, const FeatureMap& query) {
    detail::require_same_channels(ref, query);
    const std::size_t rp = ref.pixel_count();
    const std::size_t qp = query.pixel_count();
    std::vector<float> out(rp * qp);
    for (std::size_t p = 0; p < rp; ++p) {
        std::vector<double> raw(qp);
        for (std::size_t q = 0; q < qp; ++q) {
            double dot = 0.0;
            for (std::size_t ch = 0; ch < ref.channels(); ++ch) {
                dot += static_cast<double>(ref.at_flat(ch, p)) *
                       static_cast<double>(query.at_flat(ch, q));
            }
            raw[q] = dot;
        }
        const std::vector<double> soft = softmax_row(raw);
        for (std::size_t q = 0; q < qp; ++q) {
            out[p * qp + q] = static_cast<float>(soft[q]);
        }
    }
    return AffinityMatrix(rp, qp, std::move(out));
}

inline std::pair<AffinityMatrix, AffinityMatrix> embed_mask(const AffinityMatrix& a,
                                                            const ProbMask& ref_mask) {
    if (ref_mask.pixel_count() != a.ref_pixels()) {
        throw DimensionError("oracle embed_mask: mask grid mismatch");
    }
    const std::size_t rp = a.ref_pixels();
    const std::size_t qp = a.query_pixels();
    std::vector<float> bg(rp * qp);
    std::vector<float> fg(rp * qp);
    for (std::size_t p = 0; p < rp; ++p) {
        for (std::size_t q = 0; q < qp; ++q) {
            bg[p * qp + q] = a.at(p, q) * ref_mask.background_flat(p);
            fg[p * qp + q] = a.at(p, q) * ref_mask.foreground_flat(p);
        }
    }
    return {AffinityMatrix(rp, qp, std::move(bg)), AffinityMatrix(rp, qp, std::move(fg))};
}

inline ScoreMap query_wise_max(const AffinityMatrix& a_bg, const AffinityMatrix& a_fg,
                               std::size_t query_h, std::size_t query_w) {
    if (a_bg.ref_pixels() != a_fg.ref_pixels() || a_bg.query_pixels() != a_fg.query_pixels()) {
        throw DimensionError("oracle query_wise_max: matrix shapes differ");
    }
    if (query_h * query_w != a_bg.query_pixels()) {
        throw DimensionError("oracle query_wise_max: grid mismatch");
    }
    const std::size_t qp = a_bg.query_pixels();
    std::vector<float> out(2 * qp);
    for (std::size_t q = 0; q < qp; ++q) {
        float best_bg = a_bg.at(0, q);
        float best_fg = a_fg.at(0, q);
        for (std::size_t p = 1; p < a_bg.ref_pixels(); ++p) {
            best_bg = std::max(best_bg, a_bg.at(p, q));
            best_fg = std::max(best_fg, a_fg.at(p, q));
        }
        out[q] = best_bg;
        out[qp + q] = best_fg;
    }
    return ScoreMap(query_h, query_w, std::move(out));
}

inline AffinityMatrix kernel_filter(const AffinityMatrix& b, std::size_t query_h,
                                    std::size_t query_w, double sigma) {
    if (!(sigma > 0.0)) {
        throw ParameterError("oracle kernel_filter: sigma must be positive");
    }
    if (query_h * query_w != b.query_pixels()) {
        throw DimensionError("oracle kernel_filter: grid mismatch");
    }
    const std::size_t rp = b.ref_pixels();
    const std::size_t qp = b.query_pixels();
    std::vector<float> out(rp * qp);
    for (std::size_t p = 0; p < rp; ++p) {
        std::size_t best = 0;
        for (std::size_t q = 1; q < qp; ++q) {
            if (b.at(p, q) > b.at(p, best)) best = q;
        }
        const std::size_t br = best / query_w;
        const std::size_t bc = best % query_w;
        for (std::size_t q = 0; q < qp; ++q) {
            const std::size_t qr = q / query_w;
            const std::size_t qc = q % query_w;
            const double dr = static_cast<double>(qr) - static_cast<double>(br);
            const double dc = static_cast<double>(qc) - static_cast<double>(bc);
            const double d2 = dr * dr + dc * dc;
            const double w = std::exp(-d2 / (2.0 * sigma * sigma));
            out[p * qp + q] = static_cast<float>(static_cast<double>(b.at(p, q)) * w);
        }
    }
    return AffinityMatrix(rp, qp, std::move(out));
}

inline AffinityMatrix topk_filter(const AffinityMatrix& b, std::size_t k) {
    if (k == 0) {
        throw ParameterError("oracle topk_filter: k must be >= 1");
    }
    const std::size_t rp = b.ref_pixels();
    const std::size_t qp = b.query_pixels();
    std::vector<float> out(rp * qp, 0.0f);
    // An entry survives when fewer than k entries rank ahead of it, where
    // "ahead" means strictly larger or equal with a smaller flat index.
    for (std::size_t p = 0; p < rp; ++p) {
        for (std::size_t q = 0; q < qp; ++q) {
            std::size_t ahead = 0;
            for (std::size_t j = 0; j < qp; ++j) {
                if (b.at(p, j) > b.at(p, q) || (b.at(p, j) == b.at(p, q) && j < q)) {
                    ++ahead;
                }
            }
            if (ahead < k) {
                out[p * qp + q] = b.at(p, q);
            }
        }
    }
    return AffinityMatrix(rp, qp, std::move(out));
}

// Full matching pipeline computed with the naive stages above. Performance
// is explicitly not a goal here.
inline ScoreMap match(const FeatureMap& ref, const ProbMask& ref_mask, const FeatureMap& query,
                      const MatchConfig& cfg) {
    const bool equalized = cfg.mechanism == Mechanism::Equalized;
    AffinityMatrix affinity =
        equalized ? affinity_equalized(ref, query) : affinity_surjective(ref, query);
    auto [a_bg, a_fg] = embed_mask(affinity, ref_mask);
    switch (cfg.mechanism) {
        case Mechanism::BijectiveKernel:
            a_bg = kernel_filter(a_bg, query.height(), query.width(), cfg.kernel_sigma);
            a_fg = kernel_filter(a_fg, query.height(), query.width(), cfg.kernel_sigma);
            break;
        case Mechanism::BijectiveTopK:
            a_bg = topk_filter(a_bg, cfg.top_k);
            a_fg = topk_filter(a_fg, cfg.top_k);
            break;
        default:
            break;
    }
    return query_wise_max(a_bg, a_fg, query.height(), query.width());
}

}  // namespace pixmatch::oracle

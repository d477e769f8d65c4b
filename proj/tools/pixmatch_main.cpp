// pixmatch command-line tool: compute score maps from tensor files,
// generate synthetic scenes, compare matching mechanisms, benchmark the
// affinity hot loop, and export score-map visualizations.
//
// Exit codes: 0 success, 1 malformed input or I/O failure, 2 shape or
// channel mismatch, 3 bad flags or parameters, 4 property violation.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pixmatch/matching.hpp"
#include "pixmatch/scenegen.hpp"
#include "pixmatch/tensor.hpp"
#include "pixmatch/tensor_io.hpp"

namespace px = pixmatch;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 1;
constexpr int kExitShapeMismatch = 2;
constexpr int kExitBadFlags = 3;
constexpr int kExitPropertyViolation = 4;

px::Mechanism parse_mechanism(const std::string& name) {
    if (name == "surjective") return px::Mechanism::Surjective;
    if (name == "kernel") return px::Mechanism::BijectiveKernel;
    if (name == "topk") return px::Mechanism::BijectiveTopK;
    if (name == "equalized") return px::Mechanism::Equalized;
    throw px::ParameterError("unknown mechanism: " + name);
}

// PIXMATCH_THREADS overrides --threads when the flag is absent.
int resolve_threads(const std::optional<int>& flag) {
    if (flag.has_value()) {
        if (*flag < 1) throw px::ParameterError("--threads must be >= 1");
        return *flag;
    }
    if (const char* env = std::getenv("PIXMATCH_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) {
            throw px::ParameterError(std::string("invalid PIXMATCH_THREADS value: ") + env);
        }
        return static_cast<int>(v);
    }
    return 1;
}

// Accepts the mask either at the reference feature resolution or at an
// integer multiple of it, in which case it is area-downsampled first.
px::ProbMask adapt_mask(const px::ProbMask& mask, const px::FeatureMap& ref) {
    if (mask.height() == ref.height() && mask.width() == ref.width()) {
        return mask;
    }
    if (mask.height() % ref.height() == 0 && mask.width() % ref.width() == 0 &&
        mask.height() / ref.height() == mask.width() / ref.width()) {
        return px::downsample_mask(mask, mask.height() / ref.height());
    }
    throw px::DimensionError("mask grid " + std::to_string(mask.height()) + "x" +
                             std::to_string(mask.width()) +
                             " is neither the reference feature grid nor an integer multiple");
}

struct MatchArgs {
    std::string ref_path, mask_path, query_path, out_path;
    std::string mechanism;
    std::optional<double> sigma;
    std::optional<std::size_t> topk;
    std::optional<int> threads;
    bool check = false;
};

int run_match(const MatchArgs& args) {
    const px::Mechanism mechanism = parse_mechanism(args.mechanism);
    if (args.sigma.has_value() && mechanism != px::Mechanism::BijectiveKernel) {
        throw px::ParameterError("--sigma is only valid with --mechanism kernel");
    }
    if (args.topk.has_value() && mechanism != px::Mechanism::BijectiveTopK) {
        throw px::ParameterError("--topk is only valid with --mechanism topk");
    }
    if (mechanism == px::Mechanism::BijectiveKernel && !args.sigma.has_value()) {
        throw px::ParameterError("--mechanism kernel requires --sigma");
    }
    if (mechanism == px::Mechanism::BijectiveTopK && !args.topk.has_value()) {
        throw px::ParameterError("--mechanism topk requires --topk");
    }
    px::MatchConfig cfg;
    cfg.mechanism = mechanism;
    if (args.sigma.has_value()) cfg.kernel_sigma = *args.sigma;
    if (args.topk.has_value()) cfg.top_k = *args.topk;
    const int threads = resolve_threads(args.threads);

    const px::FeatureMap ref = px::io::as_feature_map(px::io::read_tensor(args.ref_path));
    const px::FeatureMap query = px::io::as_feature_map(px::io::read_tensor(args.query_path));
    const px::ProbMask mask =
        adapt_mask(px::io::as_prob_mask(px::io::read_tensor(args.mask_path)), ref);

    const px::ScoreMap result = px::match(ref, mask, query, cfg, threads);

    if (args.check) {
        if (mechanism == px::Mechanism::Equalized) {
            const px::AffinityMatrix a = px::affinity_equalized(ref, query, threads);
            for (std::size_t p = 0; p < a.ref_pixels(); ++p) {
                double sum = 0.0;
                for (std::size_t q = 0; q < a.query_pixels(); ++q) {
                    const float v = a.at(p, q);
                    if (!(v > 0.0f && v <= 1.0f)) {
                        std::cerr << "check failed: equalized entry outside (0, 1]\n";
                        return kExitPropertyViolation;
                    }
                    sum += v;
                }
                if (std::abs(sum - 1.0) > 1e-5) {
                    std::cerr << "check failed: equalized row " << p << " sums to " << sum << "\n";
                    return kExitPropertyViolation;
                }
            }
            std::cerr << "check ok: " << a.ref_pixels() << " equalized rows sum to 1 within 1e-5\n";
        } else {
            const px::AffinityMatrix a = px::affinity_surjective(ref, query, threads);
            for (float v : a.values()) {
                if (!(v >= 0.0f && v <= 1.0f)) {
                    std::cerr << "check failed: affinity entry outside [0, 1]\n";
                    return kExitPropertyViolation;
                }
            }
            std::cerr << "check ok: all affinity entries within [0, 1]\n";
        }
    }

    px::io::write_tensor(args.out_path, px::io::to_tensor_data(result));
    return kExitOk;
}

struct SceneArgs {
    std::uint64_t seed = 0;
    std::size_t copies = 3;
    std::size_t grid = 8;
    std::size_t channels = 16;
};

struct MechanismReport {
    const char* name;
    double true_fg;
    double max_distractor;
    double margin;
};

MechanismReport summarize(const px::scenegen::DistractorScene& scene, px::Mechanism mechanism,
                          const px::ScoreMap& s) {
    const double fg = s.foreground_flat(scene.fg_query_pixels.front());
    double dmax = s.foreground_flat(scene.distractor_pixels.front());
    for (std::size_t d : scene.distractor_pixels) {
        dmax = std::max(dmax, static_cast<double>(s.foreground_flat(d)));
    }
    return {px::mechanism_name(mechanism), fg, dmax, fg - dmax};
}

int run_compare(const SceneArgs& args, const std::optional<int>& threads_flag) {
    if (args.copies < 1) throw px::ParameterError("--copies must be >= 1");
    const int threads = resolve_threads(threads_flag);
    const px::scenegen::DistractorScene scene =
        px::scenegen::make_distractor_scene(args.grid, args.channels, args.copies, args.seed);

    const px::Mechanism mechanisms[] = {
        px::Mechanism::Surjective,
        px::Mechanism::BijectiveKernel,
        px::Mechanism::BijectiveTopK,
        px::Mechanism::Equalized,
    };
    std::vector<px::ScoreMap> maps;
    std::vector<MechanismReport> reports;
    for (px::Mechanism m : mechanisms) {
        maps.push_back(px::match(scene.ref, scene.ref_mask, scene.query,
                                 px::MatchConfig::initial_frame_defaults(m), threads));
        reports.push_back(summarize(scene, m, maps.back()));
    }

    std::printf("%-11s %13s %15s %13s\n", "mechanism", "true_fg", "max_distractor", "margin");
    for (const MechanismReport& r : reports) {
        std::printf("%-11s %13.9f %15.9f %13.9f\n", r.name, r.true_fg, r.max_distractor, r.margin);
    }

    // Regression gate: equalized must suppress every distractor at least
    // as hard as surjective does, and separate the true foreground at
    // least as well.
    const px::ScoreMap& surj = maps[0];
    const px::ScoreMap& eq = maps[3];
    for (std::size_t d : scene.distractor_pixels) {
        if (eq.foreground_flat(d) > surj.foreground_flat(d)) {
            std::cerr << "suppression violated at distractor pixel " << d << "\n";
            return kExitPropertyViolation;
        }
    }
    if (reports[3].margin < reports[0].margin) {
        std::cerr << "equalized margin below surjective margin\n";
        return kExitPropertyViolation;
    }
    return kExitOk;
}

struct BenchArgs {
    std::size_t grid = 24;
    std::size_t channels = 64;
    std::string mechanism = "surjective";
    std::vector<int> threads;
    int runs = 9;
};

int run_bench(const BenchArgs& args) {
    if (args.runs < 3 || args.runs % 2 == 0) {
        throw px::ParameterError("--runs must be an odd number >= 3");
    }
    if (args.grid < 1 || args.channels < 1) {
        throw px::ParameterError("--grid and --channels must be >= 1");
    }
    std::vector<int> thread_counts = args.threads;
    if (thread_counts.empty()) {
        thread_counts.push_back(resolve_threads(std::nullopt));
    }
    for (int t : thread_counts) {
        if (t < 1) throw px::ParameterError("--threads values must be >= 1");
    }
    const px::Mechanism mechanism = parse_mechanism(args.mechanism);
    const px::MatchConfig cfg = px::MatchConfig::initial_frame_defaults(mechanism);

    const px::scenegen::RandomScene scene =
        px::scenegen::make_random_scene(args.grid, args.grid, args.channels, 42);
    const double entries = static_cast<double>(scene.ref.pixel_count()) *
                           static_cast<double>(scene.query.pixel_count());

    std::printf(
        "mechanism,ref_grid,query_grid,channels,threads,runs,median_ms,entries_per_sec,"
        "speedup_vs_first\n");
    double first_median = 0.0;
    for (int threads : thread_counts) {
        px::match(scene.ref, scene.ref_mask, scene.query, cfg, threads);  // warmup
        std::vector<double> times_ms;
        times_ms.reserve(static_cast<std::size_t>(args.runs));
        for (int r = 0; r < args.runs; ++r) {
            const auto start = std::chrono::steady_clock::now();
            const px::ScoreMap s = px::match(scene.ref, scene.ref_mask, scene.query, cfg, threads);
            const auto stop = std::chrono::steady_clock::now();
            times_ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
            if (s.pixel_count() != scene.query.pixel_count()) {
                throw px::DimensionError("benchmark result has the wrong shape");
            }
        }
        std::sort(times_ms.begin(), times_ms.end());
        const double median = times_ms[times_ms.size() / 2];
        if (first_median == 0.0) first_median = median;
        std::printf("%s,%zu,%zu,%zu,%d,%d,%.6f,%.6e,%.6f\n", px::mechanism_name(mechanism),
                    args.grid, args.grid, args.channels, threads, args.runs, median,
                    entries / (median / 1e3), first_median / median);
    }
    return kExitOk;
}

int run_viz(const std::string& in_path, const std::string& channel, const std::string& out_path) {
    const px::ScoreMap s = px::io::as_score_map(px::io::read_tensor(in_path));
    const px::MaskChannel ch =
        channel == "bg" ? px::MaskChannel::Background : px::MaskChannel::Foreground;
    px::io::export_score_map_image(s, ch, out_path);
    return kExitOk;
}

int run_synth(const SceneArgs& args, const std::string& out_dir) {
    if (args.copies < 1) throw px::ParameterError("--copies must be >= 1");
    const px::scenegen::DistractorScene scene =
        px::scenegen::make_distractor_scene(args.grid, args.channels, args.copies, args.seed);

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw px::IoError("cannot create output directory " + out_dir + ": " + ec.message());
    }
    const fs::path dir(out_dir);
    px::io::write_tensor(dir / "ref.emt", px::io::to_tensor_data(scene.ref));
    px::io::write_tensor(dir / "ref_mask.emt", px::io::to_tensor_data(scene.ref_mask));
    px::io::write_tensor(dir / "query.emt", px::io::to_tensor_data(scene.query));

    std::ofstream manifest(dir / "manifest.txt", std::ios::trunc);
    if (!manifest) {
        throw px::IoError("cannot write manifest in " + out_dir);
    }
    manifest << "seed " << args.seed << "\n"
             << "grid " << args.grid << "\n"
             << "channels " << args.channels << "\n"
             << "n_copies " << scene.n_copies << "\n";
    for (std::size_t i : scene.fg_query_pixels) {
        manifest << "true_foreground " << i << "\n";
    }
    for (std::size_t i : scene.distractor_pixels) {
        manifest << "distractor " << i << "\n";
    }
    if (!manifest.flush()) {
        throw px::IoError("manifest write failed in " + out_dir);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pixel-level feature matching for video object segmentation"};
    app.require_subcommand(1);

    MatchArgs match_args;
    double sigma_value = 0.0;
    std::size_t topk_value = 0;
    int threads_value = 0;
    CLI::App* cmd_match = app.add_subcommand("match", "compute a score map from tensor files");
    cmd_match->add_option("--ref", match_args.ref_path, "reference feature map (.emt)")->required();
    cmd_match->add_option("--ref-mask", match_args.mask_path, "reference mask (.emt)")->required();
    cmd_match->add_option("--query", match_args.query_path, "query feature map (.emt)")->required();
    cmd_match
        ->add_option("--mechanism", match_args.mechanism,
                     "one of: surjective, kernel, topk, equalized")
        ->required()
        ->check(CLI::IsMember({"surjective", "kernel", "topk", "equalized"}));
    CLI::Option* sigma_opt =
        cmd_match->add_option("--sigma", sigma_value, "Gaussian kernel std dev, pixels");
    CLI::Option* topk_opt =
        cmd_match->add_option("--topk", topk_value, "query pixels kept per reference pixel");
    cmd_match->add_option("--out", match_args.out_path, "output score map (.emt)")->required();
    cmd_match->add_flag("--check", match_args.check, "verify affinity invariants before writing");
    CLI::Option* match_threads = cmd_match->add_option("--threads", threads_value, "worker threads");

    SceneArgs compare_args;
    CLI::App* cmd_compare =
        app.add_subcommand("compare", "run all mechanisms on a synthetic distractor scene");
    cmd_compare->add_option("--scene-seed", compare_args.seed, "scene RNG seed");
    cmd_compare->add_option("--copies", compare_args.copies, "distractor copies");
    cmd_compare->add_option("--grid", compare_args.grid, "square grid side");
    cmd_compare->add_option("--channels", compare_args.channels, "feature channels");
    CLI::Option* compare_threads =
        cmd_compare->add_option("--threads", threads_value, "worker threads");

    BenchArgs bench_args;
    CLI::App* cmd_bench = app.add_subcommand("bench", "benchmark match() and report CSV");
    cmd_bench->add_option("--grid", bench_args.grid, "square grid side");
    cmd_bench->add_option("--channels", bench_args.channels, "feature channels");
    cmd_bench->add_option("--mechanism", bench_args.mechanism, "mechanism to benchmark")
        ->check(CLI::IsMember({"surjective", "kernel", "topk", "equalized"}));
    cmd_bench->add_option("--threads", bench_args.threads, "worker thread counts")
        ->delimiter(',');
    cmd_bench->add_option("--runs", bench_args.runs, "timed runs, odd, >= 3");

    std::string viz_in, viz_channel = "fg", viz_out;
    CLI::App* cmd_viz = app.add_subcommand("viz", "export a score-map channel as PGM");
    cmd_viz->add_option("--in", viz_in, "score map (.emt)")->required();
    cmd_viz->add_option("--channel", viz_channel, "bg or fg")
        ->check(CLI::IsMember({"bg", "fg"}));
    cmd_viz->add_option("--out", viz_out, "output image (.pgm)")->required();

    SceneArgs synth_args;
    std::string synth_out_dir;
    CLI::App* cmd_synth = app.add_subcommand("synth", "write a distractor scene as tensor files");
    cmd_synth->add_option("--seed", synth_args.seed, "scene RNG seed");
    cmd_synth->add_option("--copies", synth_args.copies, "distractor copies");
    cmd_synth->add_option("--grid", synth_args.grid, "square grid side");
    cmd_synth->add_option("--channels", synth_args.channels, "feature channels");
    cmd_synth->add_option("--out-dir", synth_out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return kExitBadFlags;
    }

    try {
        if (cmd_match->parsed()) {
            if (*sigma_opt) match_args.sigma = sigma_value;
            if (*topk_opt) match_args.topk = topk_value;
            if (*match_threads) match_args.threads = threads_value;
            return run_match(match_args);
        }
        if (cmd_compare->parsed()) {
            std::optional<int> threads;
            if (*compare_threads) threads = threads_value;
            return run_compare(compare_args, threads);
        }
        if (cmd_bench->parsed()) {
            return run_bench(bench_args);
        }
        if (cmd_viz->parsed()) {
            return run_viz(viz_in, viz_channel, viz_out);
        }
        if (cmd_synth->parsed()) {
            return run_synth(synth_args, synth_out_dir);
        }
    } catch (const px::DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitShapeMismatch;
    } catch (const px::ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help() << std::flush;
        return kExitBadFlags;
    } catch (const px::GenerationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadFlags;
    } catch (const px::Error& e) {
        // FormatError, LengthError, UnsupportedRankError, IoError
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }
    return kExitBadFlags;
}

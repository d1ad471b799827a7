// Command-line front end: configured experiment runs and scrambler files.
#include "wiretap/experiments.hpp"
#include "wiretap/scrambler.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <stdexcept>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int run_make_scrambler(std::size_t k, std::size_t L, std::size_t w, std::uint64_t seed,
                       const std::string& out_path) {
    using namespace wiretap;
    if (k == 0) {
        std::cerr << "error: --k must be at least 1\n";
        return kExitConfig;
    }
    if (L == 0) {
        std::cerr << "error: --L must be at least 1\n";
        return kExitConfig;
    }
    if (w > k) {
        std::cerr << "error: weight w exceeds the frame length k\n";
        return kExitConfig;
    }
    try {
        gf2::ScramblerPair pair;
        if (w == 0) {
            pair = gf2::random_dense_scrambler(k * L, seed);
            pair.frame_bits = k;
            pair.block_frames = L;
        } else {
            pair = gf2::random_block_scrambler(k, L, w, seed);
        }
        gf2::save_scrambler(pair, out_path);
        char hash[32];
        std::snprintf(hash, sizeof hash, "%016llx",
                      static_cast<unsigned long long>(gf2::matrix_hash(pair.inverse)));
        std::cout << out_path << " (" << pair.size() << "x" << pair.size() << ", hash "
                  << hash << ")\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

} // namespace

int main(int argc, char** argv) {
    using namespace wiretap;

    CLI::App app{"AWGN wire-tap link toolkit: scrambled coding, block "
                 "concatenation and retransmission experiments"};

    std::string config_file, preset_name, kind_str, out_dir, scrambler_file, eve_strategy;
    std::uint64_t seed = 0;
    double snr_start = 0, snr_stop = 0, snr_step = 0, scale = 0, target_ci = 0;
    std::uint64_t frames = 0, qmax = 0, l_value = 0, w_value = 0, frame_cap = 0;
    unsigned threads = 0;

    app.add_option("--config", config_file, "config file of key = value lines");
    app.add_option("--preset", preset_name, "parameter preset: fig1..fig4 or p0check");
    app.add_option("--kind", kind_str,
                   "experiment kind (bch-curves, ldpc-curves, harq-curves, gap-table, p0-check)");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--snr-start", snr_start, "first Eb/N0 grid point (dB)");
    app.add_option("--snr-stop", snr_stop, "last Eb/N0 grid point (dB)");
    app.add_option("--snr-step", snr_step, "Eb/N0 grid step (dB)");
    app.add_option("--frames", frames, "frames per SNR point");
    app.add_option("--scale", scale, "frames multiplier for quick runs");
    app.add_option("--threads", threads, "worker threads (never changes results)");
    app.add_option("--out-dir", out_dir, "output directory");
    app.add_option("--scrambler-file", scrambler_file, "load the scrambler from this file");
    app.add_option("--eve-strategy", eve_strategy,
                   "eavesdropper combining: combine-all or best-subset");
    app.add_option("--qmax", qmax, "transmission budget per frame");
    app.add_option("--L", l_value, "frames scrambled jointly");
    app.add_option("--w", w_value, "scrambler block weight (0 = dense)");
    app.add_option("--target-ci", target_ci,
                   "simulate each point until ci/fer falls below this ratio");
    app.add_option("--frame-cap", frame_cap, "frame budget per point in target-ci mode");

    auto* mk = app.add_subcommand("make-scrambler", "generate and save a scrambler file");
    std::size_t mk_k = 0, mk_l = 1, mk_w = 0;
    std::uint64_t mk_seed = 1;
    std::string mk_out;
    mk->add_option("--k", mk_k, "information bits per frame")->required();
    mk->add_option("--L", mk_l, "frames scrambled jointly");
    mk->add_option("--w", mk_w, "block row/column weight (0 = dense)");
    mk->add_option("--seed", mk_seed, "construction seed");
    mk->add_option("--out", mk_out, "output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    if (mk->parsed()) return run_make_scrambler(mk_k, mk_l, mk_w, mk_seed, mk_out);

    experiments::ExperimentConfig cfg;
    try {
        if (!preset_name.empty()) cfg = experiments::preset(preset_name);
        if (!config_file.empty()) cfg = experiments::load_config_file(config_file, cfg);
        if (app.count("--kind")) cfg.kind = experiments::parse_kind(kind_str);
        if (app.count("--seed")) cfg.seed = seed;
        if (app.count("--snr-start")) cfg.snr_start_db = snr_start;
        if (app.count("--snr-stop")) cfg.snr_stop_db = snr_stop;
        if (app.count("--snr-step")) cfg.snr_step_db = snr_step;
        if (app.count("--frames")) cfg.frames = frames;
        if (app.count("--scale")) cfg.scale = scale;
        if (app.count("--threads")) cfg.threads = threads;
        if (app.count("--out-dir")) cfg.out_dir = out_dir;
        if (app.count("--scrambler-file")) cfg.scrambler_file = scrambler_file;
        if (app.count("--eve-strategy")) cfg.eve_strategy = eve_strategy;
        if (app.count("--qmax")) cfg.q_max = qmax;
        if (app.count("--L")) cfg.l_values = {static_cast<std::size_t>(l_value)};
        if (app.count("--w")) cfg.w = w_value;
        if (app.count("--target-ci")) cfg.target_ci = target_ci;
        if (app.count("--frame-cap")) cfg.frame_cap = frame_cap;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    const std::vector<std::string> diags = experiments::validate(cfg);
    if (!diags.empty()) {
        for (const auto& d : diags) std::cerr << "error: " << d << "\n";
        return kExitConfig;
    }

    try {
        std::cerr << "experiment " << experiments::kind_name(cfg.kind) << ", config hash "
                  << experiments::config_hash(cfg) << "\n";
        const experiments::RunResult result = experiments::run(cfg, std::cerr);
        for (const auto& f : result.files) std::cout << f << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

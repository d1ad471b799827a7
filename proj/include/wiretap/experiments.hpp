// Experiment configuration, presets and artifact emission for the CLI.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace wiretap::experiments {

enum class Kind {
    bch_curves,  // analytic descrambled-BER curves and gaps, bounded-distance code
    ldpc_curves, // simulated base FER plus block-scrambling transforms
    harq_curves, // two-receiver retransmission protocol, simulated (+ model when analytic)
    gap_table,   // analytic gap table only
    p0_check     // raw channel calibration against the closed-form BER
};

Kind parse_kind(const std::string& name); // throws std::invalid_argument
std::string kind_name(Kind kind);

struct ExperimentConfig {
    Kind kind = Kind::bch_curves;
    std::uint64_t seed = 1;

    // Code selection: "bch" uses the abstract bounded-distance model with
    // (code_n, code_k, code_t); "ldpc" builds a PEG code (code_n, code_k,
    // ldpc_col_weight) seeded by the master seed.
    std::string code = "bch";
    std::size_t code_n = 2047;
    std::size_t code_k = 1354;
    std::size_t code_t = 69;
    std::size_t ldpc_col_weight = 3;

    // Scrambling: the L values make a curve family for the curve kinds and
    // must be a single value for harq-curves. w = 0 means a dense matrix
    // (simulation) or the perfect-scrambling model (analytic curves).
    std::vector<std::size_t> l_values{1};
    std::size_t w = 0;
    std::string scrambler_file; // optional pre-built matrix, overrides construction

    double snr_start_db = 2.0;
    double snr_stop_db = 8.0;
    double snr_step_db = 0.25;

    std::size_t frames = 10000; // per SNR point, before scaling
    double scale = 1.0;         // frames multiplier for quick runs
    std::size_t q_max = 1;
    std::string eve_strategy = "combine-all"; // or "best-subset"
    double target_ci = 0.0;  // keep simulating a point until ci/fer <= this (0 = off)
    std::size_t frame_cap = 0; // frame budget per point in target-ci mode (0 = 10x frames)

    double pe_bob_max = 1e-5;
    double pe_eve_min = 0.4;

    // Not part of the configuration identity: these cannot change any number
    // in the outputs, only where they go and how fast they are computed.
    std::string out_dir = "out";
    unsigned threads = 1;
};

// Parameter sets reproducing the reference figures: fig1..fig4, plus
// "p0check" for the channel calibration sweep. Throws on unknown names.
ExperimentConfig preset(const std::string& name);

// One "key = value" assignment; throws std::invalid_argument on unknown keys
// or unparseable values. Keys match the canonical_text() lines.
void apply_key_value(ExperimentConfig& cfg, const std::string& key,
                     const std::string& value);

// Reads a config file of key = value lines ('#' starts a comment), applying
// the assignments on top of `base` so files can refine a preset.
ExperimentConfig load_config_file(const std::string& path,
                                  ExperimentConfig base = ExperimentConfig());

// All configuration problems, empty when runnable. run() refuses configs
// with diagnostics.
std::vector<std::string> validate(const ExperimentConfig& cfg);

// The hashed identity of a config: every result-affecting field in a fixed
// order, one per line. out_dir and threads are excluded.
std::string canonical_text(const ExperimentConfig& cfg);

// FNV-1a over canonical_text, 16 hex digits. Output files embed the first 8.
std::string config_hash(const ExperimentConfig& cfg);

struct RunResult {
    std::vector<std::string> files; // paths written, manifest last
};

// Executes the experiment, writing CSV/JSON artifacts into cfg.out_dir and
// progress lines to `progress`. Partial outputs are removed on error.
RunResult run(const ExperimentConfig& cfg, std::ostream& progress);

} // namespace wiretap::experiments

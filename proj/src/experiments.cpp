#include "wiretap/experiments.hpp"

#include "wiretap/analytic.hpp"
#include "wiretap/channel.hpp"
#include "wiretap/curve.hpp"
#include "wiretap/harq.hpp"
#include "wiretap/ldpc.hpp"
#include "wiretap/scrambler.hpp"
#include "wiretap/secgap.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace wiretap::experiments {

namespace {

// ---- string plumbing ----

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string fmt_g17(double v) { return fmt("%.17g", v); }
std::string fmt_g10(double v) { return fmt("%.10g", v); }

std::string fmt_log10(double l) {
    if (std::isinf(l) && l < 0) return "-inf";
    return fmt_g10(l);
}

std::string hex64(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v.empty() || v[0] == '-' || v[0] == '+')
        throw std::invalid_argument(key + ": expected a nonnegative integer, got '" + value + "'");
    std::size_t pos = 0;
    std::uint64_t out = 0;
    try {
        out = std::stoull(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(key + ": expected a nonnegative integer, got '" + value + "'");
    }
    if (pos != v.size())
        throw std::invalid_argument(key + ": trailing characters in '" + value + "'");
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    std::size_t pos = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(key + ": expected a number, got '" + value + "'");
    }
    if (v.empty() || pos != v.size())
        throw std::invalid_argument(key + ": expected a number, got '" + value + "'");
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& value) {
    std::vector<std::size_t> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(static_cast<std::size_t>(parse_u64(key, item)));
    }
    if (out.empty()) throw std::invalid_argument(key + ": expected at least one value");
    return out;
}

std::string join_sizes(const std::vector<std::size_t>& vs) {
    std::string out;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(vs[i]);
    }
    return out;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Distinct, reproducible seeds per SNR point and per target-ci top-up chunk.
std::uint64_t point_seed(std::uint64_t seed, std::size_t point) {
    return seed + (static_cast<std::uint64_t>(point) + 1) * 0x9e3779b97f4a7c15ull;
}

std::uint64_t chunk_seed(std::uint64_t base, std::size_t chunk) {
    return base + static_cast<std::uint64_t>(chunk) * 0xd1b54a32d192ed03ull;
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

harq::EveStrategy parse_eve(const std::string& name) {
    if (name == "combine-all") return harq::EveStrategy::combine_all;
    if (name == "best-subset") return harq::EveStrategy::best_subset;
    throw std::invalid_argument("unknown eve strategy: " + name);
}

// Frames per point after scaling, rounded up to whole scrambling blocks.
std::size_t effective_frames(const ExperimentConfig& cfg, std::size_t L) {
    const double scaled = static_cast<double>(cfg.frames) * cfg.scale;
    auto f = static_cast<std::size_t>(std::llround(std::max(1.0, scaled)));
    return ((f + L - 1) / L) * L;
}

std::string code_label(const ExperimentConfig& cfg) {
    if (cfg.code == "ldpc")
        return "ldpc-" + std::to_string(cfg.code_n) + "-" + std::to_string(cfg.code_k);
    return "bch-" + std::to_string(cfg.code_n) + "-" + std::to_string(cfg.code_k) + "-" +
           std::to_string(cfg.code_t);
}

// Collects the files of one run and deletes them unless the run commits.
class OutputSet {
public:
    explicit OutputSet(const std::string& dir) : dir_(dir) { fs::create_directories(dir_); }

    ~OutputSet() {
        if (committed_) return;
        for (const auto& p : written_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

    std::string write_text(const std::string& name, const std::string& body) {
        const fs::path p = dir_ / name;
        {
            std::ofstream out(p, std::ios::binary);
            if (!out) throw std::runtime_error("cannot open output file: " + p.string());
            out << body;
            if (!out) throw std::runtime_error("write failed: " + p.string());
        }
        written_.push_back(p);
        names_.push_back(name);
        return p.string();
    }

    const std::vector<std::string>& names() const { return names_; }

    std::vector<std::string> paths() const {
        std::vector<std::string> out;
        out.reserve(written_.size());
        for (const auto& p : written_) out.push_back(p.string());
        return out;
    }

    void commit() { committed_ = true; }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
    std::vector<std::string> names_;
    bool committed_ = false;
};

// ---- CSV bodies ----

constexpr const char* kCurveHeader = "ebn0_db,value,log10_value,kind\n";

std::string curve_csv(const std::vector<double>& grid,
                      const std::vector<analytic::Probability>& values, const char* kind) {
    std::string body = kCurveHeader;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        body += fmt_g10(grid[i]);
        body += ',';
        body += fmt_g17(values[i].value());
        body += ',';
        body += fmt_log10(values[i].log10());
        body += ',';
        body += kind;
        body += '\n';
    }
    return body;
}

std::string curve_csv(const std::vector<double>& grid, const std::vector<double>& values,
                      const char* kind) {
    std::string body = kCurveHeader;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        body += fmt_g10(grid[i]);
        body += ',';
        body += fmt_g17(values[i]);
        body += ',';
        body += fmt_log10(values[i] > 0.0 ? std::log10(values[i])
                                          : -std::numeric_limits<double>::infinity());
        body += ',';
        body += kind;
        body += '\n';
    }
    return body;
}

std::vector<double> to_doubles(const std::vector<analytic::Probability>& ps) {
    std::vector<double> out;
    out.reserve(ps.size());
    for (const auto& p : ps) out.push_back(p.value());
    return out;
}

struct GapRow {
    std::size_t L = 1;
    std::size_t w = 0; // 0 = perfect scrambling model
    std::string code;
    secgap::GapResult gap;
};

std::string gap_csv(const std::vector<GapRow>& rows, const ExperimentConfig& cfg) {
    std::string body = "L,w,code,pe_bob_max,pe_eve_min,snr_bob_db,snr_eve_db,gap_db\n";
    for (const auto& r : rows) {
        body += std::to_string(r.L);
        body += ',';
        body += std::to_string(r.w);
        body += ',';
        body += r.code;
        body += ',';
        body += fmt_g17(cfg.pe_bob_max);
        body += ',';
        body += fmt_g17(cfg.pe_eve_min);
        body += ',';
        body += fmt_g10(r.gap.snr_bob_db);
        body += ',';
        body += fmt_g10(r.gap.snr_eve_db);
        body += ',';
        body += fmt_g10(r.gap.gap_db);
        body += '\n';
    }
    return body;
}

// ---- report serialization ----

json counts_json(const harq::ReceiverCounts& c) {
    json j;
    j["frames"] = c.frames;
    j["info_bits"] = c.info_bits;
    j["frame_errors_pre"] = c.frame_errors_pre;
    j["bit_errors_pre"] = c.bit_errors_pre;
    j["frame_errors_post"] = c.frame_errors_post;
    j["bit_errors_post"] = c.bit_errors_post;
    j["tx_histogram"] = c.tx_histogram;
    j["ci95_fer_pre"] = harq::ci95_halfwidth(c.frame_errors_pre, c.frames);
    j["ci95_ber_post"] = harq::ci95_halfwidth(c.bit_errors_post, c.info_bits);
    return j;
}

json report_json(const harq::HarqReport& r) {
    json j;
    j["ebn0_bob_db"] = r.ebn0_bob_db;
    j["ebn0_eve_db"] = r.ebn0_eve_db;
    j["seed"] = r.seed;
    j["q_max"] = r.q_max;
    j["eve_strategy"] =
        r.eve_strategy == harq::EveStrategy::combine_all ? "combine-all" : "best-subset";
    j["frame_bits"] = r.frame_bits;
    j["block_frames"] = r.block_frames;
    j["backend"] = r.backend;
    j["noise_method"] = r.noise_method;
    j["scrambler_hash"] = hex64(r.scrambler_hash);
    j["bob"] = counts_json(r.bob);
    j["eve"] = counts_json(r.eve);
    return j;
}

json config_lines_json(const ExperimentConfig& cfg) {
    json lines = json::array();
    std::stringstream ss(canonical_text(cfg));
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    return lines;
}

// ---- per-kind runners ----

struct RunContext {
    const ExperimentConfig& cfg;
    OutputSet& out;
    json& manifest;
    std::ostream& progress;
    std::string stem; // "<short>-<hash8>-"
};

// Analytic bounded-distance family: descrambled-BER curves per L (perfect
// model, plus the weight-w model when w > 0) and the gap table.
void run_bch_family(RunContext& ctx, bool emit_curves) {
    const ExperimentConfig& cfg = ctx.cfg;
    const analytic::CodeParams code{cfg.code_n, cfg.code_k, cfg.code_t};
    const std::vector<double> grid =
        secgap::make_grid(cfg.snr_start_db, cfg.snr_stop_db, cfg.snr_step_db);

    std::vector<analytic::Probability> pf(grid.size());
    std::vector<analytic::Probability> pe_single;
    if (cfg.w > 0) pe_single.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const analytic::Probability p0 = analytic::channel_p0(grid[i], code.rate());
        pf[i] = analytic::frame_error_bdd(code, p0);
        if (cfg.w > 0) pe_single[i] = analytic::pe_real_scrambling(code, p0, cfg.w);
    }

    const secgap::SecurityThresholds thresholds{cfg.pe_bob_max, cfg.pe_eve_min};
    const std::string code_str = code_label(cfg);
    std::vector<GapRow> rows;

    for (std::size_t L : cfg.l_values) {
        std::vector<analytic::Probability> pe_perfect(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            pe_perfect[i] = analytic::block_perfect(pf[i], L).pe;
        if (emit_curves)
            ctx.out.write_text(ctx.stem + "pe-perfect-L" + std::to_string(L) + ".csv",
                               curve_csv(grid, pe_perfect, "ber"));

        ErrorRateCurve curve(grid, to_doubles(pe_perfect), CurveKind::ber,
                             CurveSource::analytic);
        GapRow row{L, 0, code_str, secgap::security_gap(curve, thresholds)};
        rows.push_back(row);
        ctx.progress << "L=" << L << " perfect: gap " << fmt_g10(row.gap.gap_db)
                     << " dB (bob " << fmt_g10(row.gap.snr_bob_db) << ", eve "
                     << fmt_g10(row.gap.snr_eve_db) << ")\n";

        if (cfg.w > 0) {
            std::vector<analytic::Probability> pe_real(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i)
                pe_real[i] = analytic::pe_block_real(pe_single[i], L);
            if (emit_curves)
                ctx.out.write_text(ctx.stem + "pe-block-w" + std::to_string(cfg.w) + "-L" +
                                       std::to_string(L) + ".csv",
                                   curve_csv(grid, pe_real, "ber"));

            ErrorRateCurve real_curve(grid, to_doubles(pe_real), CurveKind::ber,
                                      CurveSource::analytic);
            GapRow real_row{L, cfg.w, code_str, secgap::security_gap(real_curve, thresholds)};
            rows.push_back(real_row);
            ctx.progress << "L=" << L << " w=" << cfg.w << ": gap "
                         << fmt_g10(real_row.gap.gap_db) << " dB (bob "
                         << fmt_g10(real_row.gap.snr_bob_db) << ", eve "
                         << fmt_g10(real_row.gap.snr_eve_db) << ")\n";
        }
    }

    ctx.out.write_text(ctx.stem + "gaps.csv", gap_csv(rows, cfg));
    ctx.manifest["code"] = code_str;
    ctx.manifest["grid_db"] = grid;
}

// Simulated base FER of the LDPC code plus the L-block transforms.
void run_ldpc_curves(RunContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    const ldpc::LdpcCode code =
        ldpc::LdpcCode::build(cfg.code_n, cfg.code_k, cfg.ldpc_col_weight, cfg.seed);
    const harq::CodeBackend backend = harq::LdpcBackend{&code};
    const gf2::ScramblerPair scrambler = gf2::random_dense_scrambler(cfg.code_k, cfg.seed);

    const std::vector<double> grid =
        secgap::make_grid(cfg.snr_start_db, cfg.snr_stop_db, cfg.snr_step_db);
    const std::size_t frames = effective_frames(cfg, 1);

    std::vector<double> fer(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const harq::ReceiverCounts counts =
            harq::simulate_fixed_q(backend, scrambler, grid[i], 1, frames, point_seed(cfg.seed, i),
                                   channel::kStreamBob, cfg.threads);
        fer[i] = counts.fer_pre();
        ctx.progress << "snr " << fmt_g10(grid[i]) << " dB: fer " << fmt("%.6g", fer[i])
                     << " +-" << fmt("%.3g", harq::ci95_halfwidth(counts.frame_errors_pre,
                                                                  counts.frames))
                     << " (" << frames << " frames)\n";
    }

    ctx.out.write_text(ctx.stem + "fer-base.csv", curve_csv(grid, fer, "fer"));
    for (std::size_t L : cfg.l_values) {
        std::vector<double> pe(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            pe[i] = analytic::block_perfect(analytic::Probability::from_value(fer[i]), L)
                        .pe.value();
        ctx.out.write_text(ctx.stem + "pe-perfect-L" + std::to_string(L) + ".csv",
                           curve_csv(grid, pe, "ber"));
    }

    ctx.manifest["code"] = code_label(cfg);
    ctx.manifest["ldpc_col_weight"] = cfg.ldpc_col_weight;
    ctx.manifest["ldpc_construction_seed"] = cfg.seed;
    ctx.manifest["generator_hash"] = hex64(gf2::matrix_hash(code.generator));
    ctx.manifest["scrambler"] = {{"L", 1},
                                 {"w", 0},
                                 {"hash", hex64(gf2::matrix_hash(scrambler.inverse))},
                                 {"source", "constructed"}};
    ctx.manifest["grid_db"] = grid;
    ctx.manifest["frames_per_point"] = frames;
    ctx.manifest["noise_method"] = channel::FrameRng::kMethodName;
}

gf2::ScramblerPair make_harq_scrambler(const ExperimentConfig& cfg, std::size_t k,
                                       std::size_t L, json& manifest) {
    json meta;
    meta["L"] = L;
    meta["w"] = cfg.w;
    gf2::ScramblerPair scrambler;
    if (!cfg.scrambler_file.empty()) {
        scrambler = gf2::load_scrambler(cfg.scrambler_file, k, L, cfg.w);
        meta["source"] = "file:" + cfg.scrambler_file;
    } else if (cfg.w == 0) {
        scrambler = gf2::random_dense_scrambler(k * L, cfg.seed);
        scrambler.frame_bits = k;
        scrambler.block_frames = L;
        meta["source"] = "constructed";
    } else {
        scrambler = gf2::random_block_scrambler(k, L, cfg.w, cfg.seed);
        meta["source"] = "constructed";
    }
    meta["hash"] = hex64(gf2::matrix_hash(scrambler.inverse));
    manifest["scrambler"] = meta;
    return scrambler;
}

// Two-receiver retransmission protocol at equal SNR, swept over the grid;
// adds the closed-form model curves when the backend is analytic.
void run_harq_curves(RunContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    const bool is_bdd = cfg.code == "bch";

    std::optional<ldpc::LdpcCode> ldpc_code;
    harq::CodeBackend backend = harq::BddBackend{{cfg.code_n, cfg.code_k, cfg.code_t}};
    if (!is_bdd) {
        ldpc_code = ldpc::LdpcCode::build(cfg.code_n, cfg.code_k, cfg.ldpc_col_weight, cfg.seed);
        backend = harq::LdpcBackend{&*ldpc_code};
        ctx.manifest["ldpc_col_weight"] = cfg.ldpc_col_weight;
        ctx.manifest["ldpc_construction_seed"] = cfg.seed;
        ctx.manifest["generator_hash"] = hex64(gf2::matrix_hash(ldpc_code->generator));
    }

    const std::size_t k = harq::backend_info_bits(backend);
    const std::size_t L = cfg.l_values.front();
    const gf2::ScramblerPair scrambler = make_harq_scrambler(cfg, k, L, ctx.manifest);

    const std::vector<double> grid =
        secgap::make_grid(cfg.snr_start_db, cfg.snr_stop_db, cfg.snr_step_db);
    const std::size_t frames = effective_frames(cfg, L);
    std::size_t cap = cfg.frame_cap ? cfg.frame_cap : 10 * frames;
    cap = std::max(cap, frames);

    const harq::HarqConfig hcfg{cfg.q_max, parse_eve(cfg.eve_strategy), cfg.threads};

    std::string sim_body =
        "ebn0_db,fer_bob,fer_eve,ber_bob,ber_eve,ci_fer_bob,ci_fer_eve,ci_ber_bob,ci_ber_eve\n";
    json reports = json::array();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const std::uint64_t base_seed = point_seed(cfg.seed, i);
        harq::HarqReport rep = harq::simulate(backend, scrambler, hcfg, grid[i], grid[i],
                                              frames, base_seed);
        if (cfg.target_ci > 0.0) {
            // Top up until both FER estimates are tight enough or the frame
            // budget runs out. Zero-error points never satisfy the ratio and
            // stop at the cap.
            for (std::size_t c = 1; rep.bob.frames < cap; ++c) {
                const auto rel = [](const harq::ReceiverCounts& rc) {
                    if (rc.frame_errors_pre == 0)
                        return std::numeric_limits<double>::infinity();
                    return harq::ci95_halfwidth(rc.frame_errors_pre, rc.frames) / rc.fer_pre();
                };
                if (rel(rep.bob) <= cfg.target_ci && rel(rep.eve) <= cfg.target_ci) break;
                const harq::HarqReport more = harq::simulate(
                    backend, scrambler, hcfg, grid[i], grid[i], frames, chunk_seed(base_seed, c));
                rep.bob += more.bob;
                rep.eve += more.eve;
            }
        }

        sim_body += fmt_g10(grid[i]);
        sim_body += ',' + fmt_g17(rep.bob.fer_pre());
        sim_body += ',' + fmt_g17(rep.eve.fer_pre());
        sim_body += ',' + fmt_g17(rep.bob.ber_post());
        sim_body += ',' + fmt_g17(rep.eve.ber_post());
        sim_body += ',' + fmt_g10(harq::ci95_halfwidth(rep.bob.frame_errors_pre, rep.bob.frames));
        sim_body += ',' + fmt_g10(harq::ci95_halfwidth(rep.eve.frame_errors_pre, rep.eve.frames));
        sim_body +=
            ',' + fmt_g10(harq::ci95_halfwidth(rep.bob.bit_errors_post, rep.bob.info_bits));
        sim_body +=
            ',' + fmt_g10(harq::ci95_halfwidth(rep.eve.bit_errors_post, rep.eve.info_bits));
        sim_body += '\n';
        reports.push_back(report_json(rep));

        ctx.progress << "snr " << fmt_g10(grid[i]) << " dB: fer_bob "
                     << fmt("%.6g", rep.bob.fer_pre()) << " +-"
                     << fmt("%.3g", harq::ci95_halfwidth(rep.bob.frame_errors_pre, rep.bob.frames))
                     << "  fer_eve " << fmt("%.6g", rep.eve.fer_pre()) << " +-"
                     << fmt("%.3g", harq::ci95_halfwidth(rep.eve.frame_errors_pre, rep.eve.frames))
                     << "  (" << rep.bob.frames << " frames)\n";
    }

    ctx.out.write_text(ctx.stem + "sim.csv", sim_body);
    ctx.out.write_text(ctx.stem + "reports.json", reports.dump(2) + "\n");

    if (is_bdd) {
        // Model curves on the simulation grid, driven by a finely sampled
        // base FER curve that covers the q_max SNR boost.
        const analytic::CodeParams code{cfg.code_n, cfg.code_k, cfg.code_t};
        const double extra = 10.0 * std::log10(static_cast<double>(std::max<std::size_t>(cfg.q_max, 1)));
        const std::vector<double> fine = secgap::make_grid(
            cfg.snr_start_db, cfg.snr_stop_db + extra + cfg.snr_step_db, 0.05);
        std::vector<double> base(fine.size());
        for (std::size_t i = 0; i < fine.size(); ++i)
            base[i] =
                analytic::frame_error_bdd(code, analytic::channel_p0(fine[i], code.rate()))
                    .value();
        const ErrorRateCurve base_curve(fine, base, CurveKind::fer, CurveSource::analytic);

        std::vector<double> model_bob(grid.size()), model_eve(grid.size());
        json clamped = json::array();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            bool clamp_b = false, clamp_e = false;
            model_bob[i] =
                harq::pf_arq(base_curve, grid[i], cfg.q_max, harq::Receiver::bob, &clamp_b)
                    .value();
            model_eve[i] =
                harq::pf_arq(base_curve, grid[i], cfg.q_max, harq::Receiver::eve, &clamp_e)
                    .value();
            if (clamp_b || clamp_e) clamped.push_back(grid[i]);
        }
        ctx.out.write_text(ctx.stem + "model-bob.csv", curve_csv(grid, model_bob, "fer"));
        ctx.out.write_text(ctx.stem + "model-eve.csv", curve_csv(grid, model_eve, "fer"));
        if (!clamped.empty()) ctx.manifest["model_clamped_db"] = clamped;
    }

    ctx.manifest["code"] = code_label(cfg);
    ctx.manifest["grid_db"] = grid;
    ctx.manifest["frames_per_point"] = frames;
    ctx.manifest["q_max"] = cfg.q_max;
    ctx.manifest["eve_strategy"] = cfg.eve_strategy;
    ctx.manifest["noise_method"] = channel::FrameRng::kMethodName;
}

// Raw-channel calibration: hard-decision BER against the closed form.
void run_p0_check(RunContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    constexpr std::size_t kFrameBits = 1000;
    const std::vector<double> grid =
        secgap::make_grid(cfg.snr_start_db, cfg.snr_stop_db, cfg.snr_step_db);
    const std::size_t frames = effective_frames(cfg, 1);

    std::vector<double> ber(grid.size());
    std::vector<analytic::Probability> model(grid.size());
    double worst_dev = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const std::uint64_t seed = point_seed(cfg.seed, i);
        const channel::ChannelConfig ch{grid[i], 1.0, seed, channel::kStreamBob};
        std::uint64_t errors = 0;
        for (std::size_t f = 0; f < frames; ++f) {
            channel::FrameRng src(seed, f, channel::kStreamSource);
            const gf2::BitVector bits = channel::random_bits(kFrameBits, src);
            const channel::SoftFrame frame = channel::transmit(channel::modulate(bits), ch, f);
            errors += gf2::hamming_distance(channel::hard_decision(frame), bits);
        }
        const std::uint64_t total = static_cast<std::uint64_t>(frames) * kFrameBits;
        ber[i] = static_cast<double>(errors) / static_cast<double>(total);
        model[i] = analytic::channel_p0(grid[i], 1.0);

        const double p = model[i].value();
        const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(total));
        const double dev = sigma > 0.0 ? std::abs(ber[i] - p) / sigma : 0.0;
        worst_dev = std::max(worst_dev, dev);
        ctx.progress << "snr " << fmt_g10(grid[i]) << " dB: ber " << fmt("%.6g", ber[i])
                     << "  p0 " << fmt("%.6g", p) << "  dev " << fmt("%.2f", dev)
                     << " sigma\n";
    }

    ctx.out.write_text(ctx.stem + "sim.csv", curve_csv(grid, ber, "ber"));
    ctx.out.write_text(ctx.stem + "model.csv", curve_csv(grid, model, "ber"));
    ctx.manifest["grid_db"] = grid;
    ctx.manifest["frames_per_point"] = frames;
    ctx.manifest["frame_bits"] = kFrameBits;
    ctx.manifest["worst_deviation_sigma"] = worst_dev;
    ctx.manifest["noise_method"] = channel::FrameRng::kMethodName;
}

std::string kind_short(Kind kind) {
    switch (kind) {
        case Kind::bch_curves: return "bch";
        case Kind::ldpc_curves: return "ldpc";
        case Kind::harq_curves: return "harq";
        case Kind::gap_table: return "gap";
        case Kind::p0_check: return "p0";
    }
    return "unknown";
}

} // namespace

Kind parse_kind(const std::string& name) {
    if (name == "bch-curves") return Kind::bch_curves;
    if (name == "ldpc-curves") return Kind::ldpc_curves;
    if (name == "harq-curves") return Kind::harq_curves;
    if (name == "gap-table") return Kind::gap_table;
    if (name == "p0-check") return Kind::p0_check;
    throw std::invalid_argument("unknown experiment kind: " + name);
}

std::string kind_name(Kind kind) {
    switch (kind) {
        case Kind::bch_curves: return "bch-curves";
        case Kind::ldpc_curves: return "ldpc-curves";
        case Kind::harq_curves: return "harq-curves";
        case Kind::gap_table: return "gap-table";
        case Kind::p0_check: return "p0-check";
    }
    throw std::invalid_argument("unknown experiment kind");
}

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig cfg;
    if (name == "fig1") {
        cfg.kind = Kind::bch_curves;
        cfg.l_values = {1, 2, 10};
        cfg.w = 20;
        cfg.snr_start_db = 2.0;
        cfg.snr_stop_db = 8.0;
        cfg.snr_step_db = 0.1;
        return cfg;
    }
    if (name == "fig2") {
        cfg.kind = Kind::ldpc_curves;
        cfg.code = "ldpc";
        cfg.code_n = 2364;
        cfg.code_k = 1576;
        cfg.code_t = 0;
        cfg.l_values = {1, 2, 10};
        cfg.snr_start_db = 1.0;
        cfg.snr_stop_db = 3.4;
        cfg.snr_step_db = 0.2;
        cfg.frames = 10000;
        return cfg;
    }
    if (name == "fig3") {
        cfg.kind = Kind::harq_curves;
        cfg.q_max = 2;
        cfg.snr_start_db = 2.0;
        cfg.snr_stop_db = 6.0;
        cfg.snr_step_db = 0.25;
        cfg.frames = 10000;
        return cfg;
    }
    if (name == "fig4") {
        cfg.kind = Kind::harq_curves;
        cfg.code = "ldpc";
        cfg.code_n = 2364;
        cfg.code_k = 1576;
        cfg.code_t = 0;
        cfg.q_max = 2;
        cfg.snr_start_db = 1.0;
        cfg.snr_stop_db = 2.8;
        cfg.snr_step_db = 0.2;
        cfg.frames = 10000;
        return cfg;
    }
    if (name == "p0check") {
        cfg.kind = Kind::p0_check;
        cfg.snr_start_db = 0.0;
        cfg.snr_stop_db = 4.0;
        cfg.snr_step_db = 1.0;
        cfg.frames = 1000;
        return cfg;
    }
    throw std::invalid_argument("unknown preset: " + name +
                                " (expected fig1, fig2, fig3, fig4 or p0check)");
}

void apply_key_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    const std::string k = trim(key);
    const std::string v = trim(value);
    if (k == "kind") cfg.kind = parse_kind(v);
    else if (k == "seed") cfg.seed = parse_u64(k, v);
    else if (k == "code") cfg.code = v;
    else if (k == "code_n") cfg.code_n = parse_u64(k, v);
    else if (k == "code_k") cfg.code_k = parse_u64(k, v);
    else if (k == "code_t") cfg.code_t = parse_u64(k, v);
    else if (k == "ldpc_col_weight") cfg.ldpc_col_weight = parse_u64(k, v);
    else if (k == "L") cfg.l_values = parse_size_list(k, v);
    else if (k == "w") cfg.w = parse_u64(k, v);
    else if (k == "scrambler_file") cfg.scrambler_file = v;
    else if (k == "snr_start_db") cfg.snr_start_db = parse_double(k, v);
    else if (k == "snr_stop_db") cfg.snr_stop_db = parse_double(k, v);
    else if (k == "snr_step_db") cfg.snr_step_db = parse_double(k, v);
    else if (k == "frames") cfg.frames = parse_u64(k, v);
    else if (k == "scale") cfg.scale = parse_double(k, v);
    else if (k == "q_max" || k == "qmax") cfg.q_max = parse_u64(k, v);
    else if (k == "eve_strategy") cfg.eve_strategy = v;
    else if (k == "target_ci") cfg.target_ci = parse_double(k, v);
    else if (k == "frame_cap") cfg.frame_cap = parse_u64(k, v);
    else if (k == "pe_bob_max") cfg.pe_bob_max = parse_double(k, v);
    else if (k == "pe_eve_min") cfg.pe_eve_min = parse_double(k, v);
    else if (k == "out_dir") cfg.out_dir = v;
    else if (k == "threads") cfg.threads = static_cast<unsigned>(parse_u64(k, v));
    else throw std::invalid_argument("unknown config key: " + k);
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    ExperimentConfig cfg = std::move(base);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": expected 'key = value'");
        apply_key_value(cfg, line.substr(0, eq), line.substr(eq + 1));
    }
    return cfg;
}

std::vector<std::string> validate(const ExperimentConfig& cfg) {
    std::vector<std::string> diags;
    const bool simulated = cfg.kind == Kind::ldpc_curves || cfg.kind == Kind::harq_curves ||
                           cfg.kind == Kind::p0_check;

    if (!(cfg.snr_step_db > 0.0)) diags.push_back("snr_step_db must be positive");
    else if (cfg.snr_stop_db < cfg.snr_start_db)
        diags.push_back("empty SNR grid: snr_stop_db is below snr_start_db");

    if (cfg.code != "bch" && cfg.code != "ldpc")
        diags.push_back("code must be 'bch' or 'ldpc', got '" + cfg.code + "'");
    if (cfg.code_k == 0 || cfg.code_k >= cfg.code_n)
        diags.push_back("code dimensions require 0 < code_k < code_n");
    if (cfg.code == "bch" && cfg.code_t > cfg.code_n)
        diags.push_back("code_t cannot exceed code_n");
    if (cfg.code == "ldpc") {
        if (cfg.ldpc_col_weight < 2) diags.push_back("ldpc_col_weight must be at least 2");
        else if (cfg.code_k < cfg.code_n && cfg.ldpc_col_weight > cfg.code_n - cfg.code_k)
            diags.push_back("ldpc_col_weight cannot exceed the number of parity checks");
    }

    if ((cfg.kind == Kind::bch_curves || cfg.kind == Kind::gap_table) && cfg.code != "bch")
        diags.push_back(kind_name(cfg.kind) + " uses the bounded-distance model (code = bch)");
    if (cfg.kind == Kind::ldpc_curves && cfg.code != "ldpc")
        diags.push_back("ldpc-curves requires code = ldpc");

    if (cfg.l_values.empty()) diags.push_back("L list must not be empty");
    for (std::size_t L : cfg.l_values)
        if (L == 0) diags.push_back("L values must be at least 1");
    if (cfg.kind == Kind::harq_curves && cfg.l_values.size() != 1)
        diags.push_back("harq-curves takes a single L value");

    if (cfg.w > cfg.code_k)
        diags.push_back("scrambler weight w exceeds the information length k");

    if (simulated) {
        if (cfg.frames == 0) diags.push_back("frames must be at least 1 for simulated runs");
        if (!(cfg.scale > 0.0)) diags.push_back("scale must be positive");
        if (cfg.threads == 0) diags.push_back("threads must be at least 1");
    }

    if (cfg.q_max == 0) diags.push_back("q_max must be at least 1");
    else if (cfg.q_max > 63) diags.push_back("q_max above 63 is not supported");
    if (cfg.eve_strategy != "combine-all" && cfg.eve_strategy != "best-subset")
        diags.push_back("eve_strategy must be combine-all or best-subset, got '" +
                        cfg.eve_strategy + "'");
    else if (cfg.eve_strategy == "best-subset" && cfg.q_max > 16)
        diags.push_back("best-subset is limited to q_max <= 16");

    if (cfg.target_ci < 0.0 || cfg.target_ci >= 1.0)
        diags.push_back("target_ci must lie in [0, 1)");
    if (!(cfg.pe_bob_max > 0.0 && cfg.pe_bob_max <= cfg.pe_eve_min && cfg.pe_eve_min <= 0.5))
        diags.push_back("thresholds require 0 < pe_bob_max <= pe_eve_min <= 0.5");

    if (!cfg.scrambler_file.empty()) {
        if (cfg.kind != Kind::harq_curves)
            diags.push_back("scrambler_file applies to harq-curves only");
        else if (!fs::exists(cfg.scrambler_file))
            diags.push_back("scrambler file not found: " + cfg.scrambler_file);
    }

    return diags;
}

std::string canonical_text(const ExperimentConfig& cfg) {
    std::string out;
    const auto add = [&out](const char* key, const std::string& value) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    };
    add("kind", kind_name(cfg.kind));
    add("seed", std::to_string(cfg.seed));
    add("code", cfg.code);
    add("code_n", std::to_string(cfg.code_n));
    add("code_k", std::to_string(cfg.code_k));
    add("code_t", std::to_string(cfg.code_t));
    add("ldpc_col_weight", std::to_string(cfg.ldpc_col_weight));
    add("L", join_sizes(cfg.l_values));
    add("w", std::to_string(cfg.w));
    add("scrambler_file", cfg.scrambler_file);
    add("snr_start_db", fmt_g17(cfg.snr_start_db));
    add("snr_stop_db", fmt_g17(cfg.snr_stop_db));
    add("snr_step_db", fmt_g17(cfg.snr_step_db));
    add("frames", std::to_string(cfg.frames));
    add("scale", fmt_g17(cfg.scale));
    add("q_max", std::to_string(cfg.q_max));
    add("eve_strategy", cfg.eve_strategy);
    add("target_ci", fmt_g17(cfg.target_ci));
    add("frame_cap", std::to_string(cfg.frame_cap));
    add("pe_bob_max", fmt_g17(cfg.pe_bob_max));
    add("pe_eve_min", fmt_g17(cfg.pe_eve_min));
    return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
    return hex64(fnv1a64(canonical_text(cfg)));
}

RunResult run(const ExperimentConfig& cfg, std::ostream& progress) {
    const std::vector<std::string> diags = validate(cfg);
    if (!diags.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& d : diags) msg += "\n  " + d;
        throw std::invalid_argument(msg);
    }

    const std::string hash = config_hash(cfg);
    OutputSet out(cfg.out_dir);
    json manifest;
    manifest["kind"] = kind_name(cfg.kind);
    manifest["config"] = config_lines_json(cfg);
    manifest["config_hash"] = hash;
    manifest["seed"] = cfg.seed;

    RunContext ctx{cfg, out, manifest, progress,
                   kind_short(cfg.kind) + "-" + hash.substr(0, 8) + "-"};

    switch (cfg.kind) {
        case Kind::bch_curves: run_bch_family(ctx, true); break;
        case Kind::gap_table: run_bch_family(ctx, false); break;
        case Kind::ldpc_curves: run_ldpc_curves(ctx); break;
        case Kind::harq_curves: run_harq_curves(ctx); break;
        case Kind::p0_check: run_p0_check(ctx); break;
    }

    const std::string manifest_name = ctx.stem + "manifest.json";
    std::vector<std::string> files = out.names();
    files.push_back(manifest_name);
    manifest["files"] = files;
    manifest["created_utc"] = utc_now();
    out.write_text(manifest_name, manifest.dump(2) + "\n");
    out.commit();
    return RunResult{out.paths()};
}

} // namespace wiretap::experiments

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "wiretap/experiments.hpp"

#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifndef WIRETAPSIM_PATH
#error "WIRETAPSIM_PATH must point at the CLI binary"
#endif

using namespace wiretap::experiments;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("wiretap_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) out.push_back(line);
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

// The one file in `files` whose name ends with `suffix`.
fs::path find_file(const std::vector<std::string>& files, const std::string& suffix) {
    fs::path hit;
    for (const auto& f : files) {
        const std::string name = fs::path(f).filename().string();
        if (name.size() >= suffix.size() &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
            REQUIRE(hit.empty());
            hit = f;
        }
    }
    REQUIRE_FALSE(hit.empty());
    return hit;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + WIRETAPSIM_PATH + "\" " + args +
                            " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

ExperimentConfig tiny_p0(const fs::path& out) {
    ExperimentConfig cfg = preset("p0check");
    cfg.snr_start_db = 0.0;
    cfg.snr_stop_db = 2.0;
    cfg.snr_step_db = 1.0;
    cfg.frames = 3;
    cfg.out_dir = out.string();
    return cfg;
}

} // namespace

TEST_CASE("experiment kinds round-trip through their names") {
    for (Kind k : {Kind::bch_curves, Kind::ldpc_curves, Kind::harq_curves, Kind::gap_table,
                   Kind::p0_check})
        CHECK(parse_kind(kind_name(k)) == k);
    CHECK_THROWS_AS(parse_kind("nope"), std::invalid_argument);
}

TEST_CASE("presets carry the published parameter sets") {
    const ExperimentConfig f1 = preset("fig1");
    CHECK(f1.kind == Kind::bch_curves);
    CHECK(f1.l_values == std::vector<std::size_t>{1, 2, 10});
    CHECK(f1.w == 20);
    CHECK(f1.snr_start_db == 2.0);
    CHECK(f1.snr_stop_db == 8.0);
    CHECK(f1.code_n == 2047);
    CHECK(f1.code_k == 1354);
    CHECK(f1.code_t == 69);

    const ExperimentConfig f2 = preset("fig2");
    CHECK(f2.kind == Kind::ldpc_curves);
    CHECK(f2.code == "ldpc");
    CHECK(f2.code_n == 2364);
    CHECK(f2.code_k == 1576);

    const ExperimentConfig f3 = preset("fig3");
    CHECK(f3.kind == Kind::harq_curves);
    CHECK(f3.q_max == 2);

    const ExperimentConfig f4 = preset("fig4");
    CHECK(f4.kind == Kind::harq_curves);
    CHECK(f4.code == "ldpc");
    CHECK(f4.q_max == 2);

    CHECK(preset("p0check").kind == Kind::p0_check);
    CHECK_THROWS_AS(preset("fig9"), std::invalid_argument);

    for (const char* name : {"fig1", "fig2", "fig3", "fig4", "p0check"})
        CHECK(validate(preset(name)).empty());
}

TEST_CASE("key = value assignment") {
    ExperimentConfig cfg;
    apply_key_value(cfg, "seed", "9");
    CHECK(cfg.seed == 9);
    apply_key_value(cfg, " snr_step_db ", " 0.5 ");
    CHECK(cfg.snr_step_db == 0.5);
    apply_key_value(cfg, "L", "1, 2, 10");
    CHECK(cfg.l_values == std::vector<std::size_t>{1, 2, 10});
    apply_key_value(cfg, "eve_strategy", "best-subset");
    CHECK(cfg.eve_strategy == "best-subset");
    apply_key_value(cfg, "qmax", "4");
    CHECK(cfg.q_max == 4);
    apply_key_value(cfg, "kind", "gap-table");
    CHECK(cfg.kind == Kind::gap_table);

    CHECK_THROWS_AS(apply_key_value(cfg, "snr", "1"), std::invalid_argument);
    CHECK_THROWS_AS(apply_key_value(cfg, "seed", "abc"), std::invalid_argument);
    CHECK_THROWS_AS(apply_key_value(cfg, "frames", "12x"), std::invalid_argument);
    CHECK_THROWS_AS(apply_key_value(cfg, "scale", ""), std::invalid_argument);
}

TEST_CASE("config files overlay a base configuration") {
    const fs::path dir = fresh_dir("cfgfile");
    const fs::path file = dir / "run.cfg";
    {
        std::ofstream out(file);
        out << "# quick harq check\n"
            << "kind = harq-curves\n"
            << "frames = 24   # per point\n"
            << "\n"
            << "q_max = 3\n";
    }
    const ExperimentConfig cfg = load_config_file(file.string(), preset("fig3"));
    CHECK(cfg.kind == Kind::harq_curves);
    CHECK(cfg.frames == 24);
    CHECK(cfg.q_max == 3);
    // Untouched preset fields survive.
    CHECK(cfg.snr_start_db == 2.0);

    CHECK_THROWS_AS(load_config_file((dir / "missing.cfg").string()),
                    std::invalid_argument);
    {
        std::ofstream out(file);
        out << "just words\n";
    }
    CHECK_THROWS_AS(load_config_file(file.string()), std::invalid_argument);
    fs::remove_all(dir);
}

TEST_CASE("validate lists every problem") {
    ExperimentConfig cfg = preset("fig3");
    CHECK(validate(cfg).empty());

    cfg.frames = 0;
    cfg.q_max = 0;
    cfg.snr_stop_db = cfg.snr_start_db - 1.0;
    const std::vector<std::string> diags = validate(cfg);
    CHECK(diags.size() == 3);

    ExperimentConfig wide = preset("fig1");
    wide.w = wide.code_k + 1;
    CHECK(validate(wide).size() == 1);

    ExperimentConfig multi = preset("fig3");
    multi.l_values = {1, 2};
    CHECK_FALSE(validate(multi).empty());

    ExperimentConfig wrong_code = preset("fig2");
    wrong_code.code = "bch";
    CHECK_FALSE(validate(wrong_code).empty());

    ExperimentConfig stray = preset("p0check");
    stray.scrambler_file = "somewhere.txt";
    CHECK_FALSE(validate(stray).empty());

    ExperimentConfig subset = preset("fig3");
    subset.eve_strategy = "best-subset";
    subset.q_max = 17;
    CHECK_FALSE(validate(subset).empty());
}

TEST_CASE("config identity ignores out_dir and threads") {
    ExperimentConfig a = preset("fig1");
    ExperimentConfig b = a;
    b.out_dir = "elsewhere";
    b.threads = 8;
    CHECK(canonical_text(a) == canonical_text(b));
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);

    b.seed = a.seed + 1;
    CHECK(config_hash(a) != config_hash(b));

    // The text is line-oriented key = value, starting with the kind.
    const std::vector<std::string> lines = split_lines(canonical_text(a));
    CHECK(lines.front() == "kind = bch-curves");
}

TEST_CASE("p0 calibration run emits sim, model and manifest") {
    const fs::path dir = fresh_dir("p0run");
    const ExperimentConfig cfg = tiny_p0(dir);
    std::ostringstream progress;
    const RunResult result = run(cfg, progress);

    REQUIRE(result.files.size() == 3);
    for (const auto& f : result.files) CHECK(fs::exists(f));

    const fs::path sim = find_file(result.files, "-sim.csv");
    const fs::path model = find_file(result.files, "-model.csv");
    const fs::path manifest_path = find_file(result.files, "-manifest.json");
    CHECK(result.files.back() == manifest_path.string());

    const std::vector<std::string> lines = split_lines(slurp(sim));
    REQUIRE(lines.size() == 4); // header + 3 grid points
    CHECK(lines[0] == "ebn0_db,value,log10_value,kind");
    CHECK(split_csv(lines[1]).size() == 4);
    CHECK(split_csv(lines[1])[3] == "ber");

    // Simulated and model curves agree loosely even at 3000 bits per point.
    const auto sim_row = split_csv(lines[1]);
    const auto model_row = split_csv(split_lines(slurp(model))[1]);
    const double sim_v = std::stod(sim_row[1]);
    const double model_v = std::stod(model_row[1]);
    CHECK(sim_v > 0.5 * model_v);
    CHECK(sim_v < 2.0 * model_v);

    const json manifest = json::parse(slurp(manifest_path));
    CHECK(manifest.at("kind") == "p0-check");
    CHECK(manifest.at("config_hash") == config_hash(cfg));
    CHECK(manifest.at("seed") == cfg.seed);
    CHECK(manifest.at("files").size() == 3);
    CHECK(manifest.contains("created_utc"));
    fs::remove_all(dir);
}

TEST_CASE("reruns are byte-identical apart from the timestamp") {
    const fs::path dir_a = fresh_dir("rerun_a");
    const fs::path dir_b = fresh_dir("rerun_b");
    std::ostringstream progress;
    const RunResult a = run(tiny_p0(dir_a), progress);
    const RunResult b = run(tiny_p0(dir_b), progress);

    REQUIRE(a.files.size() == b.files.size());
    for (std::size_t i = 0; i + 1 < a.files.size(); ++i) {
        CHECK(fs::path(a.files[i]).filename() == fs::path(b.files[i]).filename());
        CHECK(slurp(a.files[i]) == slurp(b.files[i]));
    }
    json ma = json::parse(slurp(a.files.back()));
    json mb = json::parse(slurp(b.files.back()));
    ma.erase("created_utc");
    mb.erase("created_utc");
    CHECK(ma == mb);
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("analytic curve family with gap table") {
    const fs::path dir = fresh_dir("bchrun");
    ExperimentConfig cfg = preset("fig1");
    cfg.l_values = {1, 2};
    cfg.snr_start_db = 3.0;
    cfg.snr_stop_db = 6.0;
    cfg.snr_step_db = 0.5;
    cfg.out_dir = dir.string();
    std::ostringstream progress;
    const RunResult result = run(cfg, progress);

    // Two curves per L, one gap table, one manifest.
    REQUIRE(result.files.size() == 6);
    find_file(result.files, "-pe-perfect-L1.csv");
    find_file(result.files, "-pe-perfect-L2.csv");
    find_file(result.files, "-pe-block-w20-L1.csv");
    find_file(result.files, "-pe-block-w20-L2.csv");

    const fs::path gaps = find_file(result.files, "-gaps.csv");
    const std::vector<std::string> lines = split_lines(slurp(gaps));
    REQUIRE(lines.size() == 5); // header + (perfect, w=14) x (L=1, L=2)
    CHECK(lines[0] == "L,w,code,pe_bob_max,pe_eve_min,snr_bob_db,snr_eve_db,gap_db");

    double gap_perfect_l1 = 0.0, gap_perfect_l2 = 0.0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto row = split_csv(lines[i]);
        REQUIRE(row.size() == 8);
        CHECK(row[2] == "bch-2047-1354-69");
        const double gap = std::stod(row[7]);
        CHECK(gap > 0.0);
        CHECK(std::abs(gap - (std::stod(row[5]) - std::stod(row[6]))) <= 1e-6);
        if (row[1] == "0" && row[0] == "1") gap_perfect_l1 = gap;
        if (row[1] == "0" && row[0] == "2") gap_perfect_l2 = gap;
    }
    // Concatenating more frames under one scrambler narrows the gap.
    CHECK(gap_perfect_l2 < gap_perfect_l1);

    // The progress stream mentions each gap as it is found.
    CHECK(progress.str().find("gap") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("failed runs leave no partial outputs behind") {
    const fs::path dir = fresh_dir("failrun");
    ExperimentConfig cfg = preset("fig1");
    // Far above the waterfall the curve never reaches pe_eve_min, so the gap
    // extraction fails after the curve files were already written.
    cfg.snr_start_db = 7.0;
    cfg.snr_stop_db = 8.0;
    cfg.snr_step_db = 0.5;
    cfg.out_dir = dir.string();
    std::ostringstream progress;
    CHECK_THROWS(run(cfg, progress));
    CHECK(fs::is_empty(dir));
    fs::remove_all(dir);
}

TEST_CASE("invalid configs are rejected with diagnostics in the message") {
    ExperimentConfig cfg = preset("fig3");
    cfg.frames = 0;
    std::ostringstream progress;
    try {
        run(cfg, progress);
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("frames") != std::string::npos);
    }
}

TEST_CASE("cli runs a preset end to end") {
    const fs::path dir = fresh_dir("cli_p0");
    const int rc = run_cli("--preset p0check --snr-start 0 --snr-stop 1 --snr-step 1"
                           " --frames 3 --seed 3 --out-dir " + dir.string());
    CHECK(rc == 0);
    bool saw_sim = false;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.find("-sim.csv") != std::string::npos) saw_sim = true;
    }
    CHECK(saw_sim);
    fs::remove_all(dir);
}

TEST_CASE("cli rejects bad invocations with exit code 2") {
    CHECK(run_cli("--preset p0check --frames 0") == 2);
    CHECK(run_cli("--no-such-flag") == 2);
    CHECK(run_cli("--preset fig9") == 2);
    CHECK(run_cli("--kind harq-curves --L 1,2 --frames 4") == 2);
}

TEST_CASE("cli builds scramblers and feeds them back into a run") {
    const fs::path dir = fresh_dir("cli_scram");
    const fs::path matrix = dir / "scrambler.txt";
    CHECK(run_cli("make-scrambler --k 64 --L 2 --w 5 --seed 4 --out " + matrix.string()) == 0);
    CHECK(fs::exists(matrix));

    // Degenerate requests fail cleanly.
    CHECK(run_cli("make-scrambler --k 0 --out " + (dir / "x.txt").string()) == 2);
    CHECK(run_cli("make-scrambler --k 8 --w 9 --out " + (dir / "y.txt").string()) == 2);

    const fs::path cfg_file = dir / "run.cfg";
    {
        std::ofstream out(cfg_file);
        out << "kind = harq-curves\n"
            << "code = bch\n"
            << "code_n = 127\ncode_k = 64\ncode_t = 10\n"
            << "L = 2\nw = 5\n"
            << "scrambler_file = " << matrix.string() << "\n"
            << "snr_start_db = 2\nsnr_stop_db = 3\nsnr_step_db = 1\n"
            << "frames = 8\nq_max = 2\n";
    }
    const fs::path out_dir = dir / "out";
    CHECK(run_cli("--config " + cfg_file.string() + " --seed 7 --out-dir " +
                  out_dir.string()) == 0);
    bool saw_reports = false;
    for (const auto& entry : fs::directory_iterator(out_dir))
        if (entry.path().filename().string().find("-reports.json") != std::string::npos)
            saw_reports = true;
    CHECK(saw_reports);
    fs::remove_all(dir);
}

TEST_CASE("cli simulation output does not depend on the thread count") {
    const fs::path dir_a = fresh_dir("cli_thr1");
    const fs::path dir_b = fresh_dir("cli_thr2");
    const std::string base = "--preset fig3 --snr-start 3 --snr-stop 4 --snr-step 0.5"
                             " --frames 40 --seed 5 --out-dir ";
    CHECK(run_cli(base + dir_a.string() + " --threads 1") == 0);
    CHECK(run_cli(base + dir_b.string() + " --threads 2") == 0);

    bool compared = false;
    for (const auto& entry : fs::directory_iterator(dir_a)) {
        const std::string name = entry.path().filename().string();
        if (name.find("manifest") != std::string::npos) continue;
        CHECK(slurp(entry.path()) == slurp(dir_b / name));
        compared = true;
    }
    CHECK(compared);
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("scaled harq run keeps the report consistent with the request") {
    const fs::path dir = fresh_dir("harq_scale");
    ExperimentConfig cfg = preset("fig3");
    cfg.snr_start_db = 3.0;
    cfg.snr_stop_db = 3.0;
    cfg.frames = 10;
    cfg.scale = 0.5;
    cfg.out_dir = dir.string();
    std::ostringstream progress;
    const RunResult result = run(cfg, progress);

    const json reports = json::parse(slurp(find_file(result.files, "-reports.json")));
    REQUIRE(reports.is_array());
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].at("bob").at("frames") == 5);
    CHECK(reports[0].at("q_max") == 2);
    CHECK(reports[0].at("noise_method") == "splitmix64-polar");

    const fs::path sim = find_file(result.files, "-sim.csv");
    const std::vector<std::string> lines = split_lines(slurp(sim));
    REQUIRE(lines.size() == 2);
    const auto header = split_csv(lines[0]);
    REQUIRE(header.size() == 9);
    CHECK(header[0] == "ebn0_db");
    CHECK(split_csv(lines[1]).size() == 9);
    fs::remove_all(dir);
}

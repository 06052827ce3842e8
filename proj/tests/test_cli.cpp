// Black-box checks of the command-line tool. The binary path arrives in
// PEGASUS_CLI_BIN (set by the test harness); without it the cases skip.

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "pegasus/dataset.hpp"
#include "pegasus/detectors/common.hpp"
#include "pegasus/experiment.hpp"
#include "pegasus/synthetic.hpp"
#include "pegasus/version.hpp"

namespace fs = std::filesystem;

namespace {

const char* cli_bin() { return std::getenv("PEGASUS_CLI_BIN"); }

#define REQUIRE_CLI()                                             \
    if (!cli_bin()) {                                             \
        MESSAGE("PEGASUS_CLI_BIN not set; skipping CLI checks");  \
        return;                                                   \
    }

struct CmdResult {
    int code = -1;
    std::string output;  // stdout and stderr interleaved
};

fs::path temp_dir(const std::string& tag) {
    auto p = fs::temp_directory_path() / ("pegasus_test_cli_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

CmdResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path capture =
        fs::temp_directory_path() / ("pegasus_cli_capture_" + std::to_string(counter++) + ".txt");
    const std::string cmd =
        std::string(cli_bin()) + " " + args + " > " + capture.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());

    CmdResult r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(capture, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    r.output = buf.str();
    fs::remove(capture);
    return r;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

pegasus::data::ContaminatedSample small_horses(std::uint64_t seed) {
    auto cfg = pegasus::data::default_pegasus_config();
    cfg.n_normal = 200;
    return pegasus::data::generate_pegasus(cfg, seed);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("version and argument errors") {
    REQUIRE_CLI();
    const CmdResult version = run_cli("--version");
    CHECK(version.code == 0);
    CHECK(version.output.find(pegasus::kVersion) != std::string::npos);

    CHECK(run_cli("").code == 1);                      // a subcommand is required
    CHECK(run_cli("no-such-command").code == 1);       // parse error
    CHECK(run_cli("run").code == 1);                   // --config is required
    CHECK(run_cli("detect --method lof").code == 1);   // --out is required
}

TEST_CASE("cod-demo emits a json report") {
    REQUIRE_CLI();
    const CmdResult r = run_cli("cod-demo --dim 6 --pairs 5000 --seed 1");
    REQUIRE(r.code == 0);
    const nlohmann::json j = nlohmann::json::parse(r.output);
    CHECK(j.at("dim").get<std::size_t>() == 6);
    CHECK(j.at("n_pairs").get<std::size_t>() == 5000);
    CHECK(j.at("mean_sq_dist").get<double>() > 0.0);
    CHECK(j.at("std_sq_dist").get<double>() > 0.0);

    CHECK(run_cli("cod-demo --dim 0 --pairs 100").code == 1);
}

TEST_CASE("pegasus-demo writes the walkthrough files") {
    REQUIRE_CLI();
    const auto dir = temp_dir("demo");
    const CmdResult r =
        run_cli("pegasus-demo --n-normal 300 --seed 42 --out " + (dir / "demo").string());
    REQUIRE(r.code == 0);
    CHECK(r.output.find("| Eohippus |") != std::string::npos);
    CHECK(fs::exists(dir / "demo" / "demo.md"));
    CHECK(read_file(dir / "demo" / "demo.md") == r.output);
    const nlohmann::json j = nlohmann::json::parse(read_file(dir / "demo" / "demo.json"));
    CHECK(j.at("specials").size() == 4);
    fs::remove_all(dir);
}

TEST_CASE("run maps config problems to exit codes") {
    REQUIRE_CLI();
    const auto dir = temp_dir("run_errors");
    CHECK(run_cli("run --config " + (dir / "missing.cfg").string()).code == 2);  // io error

    write_file(dir / "bad.cfg",
               "dataset = pegasus\nmanifold.method = pca\nmanifold.latent = 2\nbogus.key = 1\n");
    const CmdResult bad = run_cli("run --config " + (dir / "bad.cfg").string());
    CHECK(bad.code == 1);
    CHECK(bad.output.find("bogus.key") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("sample -> manifold -> detect -> combine -> framework -> report") {
    REQUIRE_CLI();
    const auto dir = temp_dir("pipeline");
    const auto sample = small_horses(5);
    const std::string sample_csv = (dir / "sample.csv").string();
    pegasus::data::save_sample_csv(sample_csv, sample);

    const std::string model = (dir / "model.bin").string();
    const CmdResult fit = run_cli("fit-manifold --input " + sample_csv +
                                  " --method pca --latent 2 --out " + model);
    REQUIRE(fit.code == 0);
    CHECK(fit.output.find("method=pca latent_dim=2") != std::string::npos);

    const std::string lof_flags = (dir / "lof_flags.csv").string();
    const CmdResult det_lof =
        run_cli("detect --input " + sample_csv + " --method lof --model " + model +
                " --k 0 --out " + lof_flags + " --scores " + (dir / "lof_scores.csv").string());
    REQUIRE(det_lof.code == 0);
    CHECK(det_lof.output.find("flagged=") != std::string::npos);
    CHECK(fs::exists(lof_flags + ".meta.json"));
    CHECK(fs::exists(dir / "lof_scores.csv"));

    const std::string re_flags = (dir / "re_flags.csv").string();
    REQUIRE(run_cli("detect --input " + sample_csv + " --method re --model " + model +
                    " --k 0 --out " + re_flags)
                .code == 0);
    // re without a model is a usage error
    CHECK(run_cli("detect --input " + sample_csv + " --method re --k 0 --out " +
                  (dir / "x.csv").string())
              .code == 1);

    const std::string union_flags = (dir / "union_flags.csv").string();
    const CmdResult comb =
        run_cli("combine --inputs " + lof_flags + " " + re_flags + " --out " + union_flags);
    REQUIRE(comb.code == 0);
    CHECK(comb.output.find("from=2") != std::string::npos);
    {
        const auto united = pegasus::detect::load_flags_csv(union_flags);
        const auto expect = pegasus::detect::combine_flags(
            {pegasus::detect::load_flags_csv(lof_flags), pegasus::detect::load_flags_csv(re_flags)});
        CHECK(united.indices == expect.indices);
    }

    const CmdResult part = run_cli("framework partition --input " + sample_csv + " --model " +
                                   model + " --out " + (dir / "part.json").string());
    REQUIRE(part.code == 0);
    {
        const nlohmann::json j = nlohmann::json::parse(read_file(dir / "part.json"));
        CHECK(j.at("partition").at("n_points").get<std::size_t>() == sample.size());
        CHECK(j.at("regime").at("latent_dim").get<std::size_t>() == 2);
    }

    const CmdResult est = run_cli("framework estimates --input " + sample_csv + " --model " +
                                  model + " --on " + lof_flags + " --off " + re_flags +
                                  " --out " + (dir / "est.json").string());
    REQUIRE(est.code == 0);
    {
        const nlohmann::json j = nlohmann::json::parse(read_file(dir / "est.json"));
        CHECK(j.at("estimates").at("n_points").get<std::size_t>() == sample.size());
        CHECK(j.at("estimates").contains("est_recall_off"));
    }

    // a config-driven run, then an offline re-render of its json report
    write_file(dir / "exp.cfg",
               "dataset = pegasus\npegasus.n_normal = 200\npegasus.seed = 5\n"
               "manifold.method = pca\nmanifold.latent = 2\n"
               "detectors = lof\nflags.k = auto\n"
               "combine.with_if = false\n"
               "output.formats = csv, json\n");
    const CmdResult run = run_cli("run --config " + (dir / "exp.cfg").string() + " --out " +
                                  (dir / "out").string());
    REQUIRE(run.code == 0);
    CHECK(run.output.find("## Recall (mean across runs)") != std::string::npos);
    REQUIRE(fs::exists(dir / "out" / "report.json"));
    REQUIRE(fs::exists(dir / "out" / "report.csv"));

    const CmdResult rerender =
        run_cli("report --input " + (dir / "out" / "report.json").string() +
                " --format csv --out " + (dir / "rerender.csv").string());
    REQUIRE(rerender.code == 0);
    CHECK(read_file(dir / "rerender.csv") == read_file(dir / "out" / "report.csv"));
    fs::remove_all(dir);
}

TEST_CASE("combine refuses flags from different samples") {
    REQUIRE_CLI();
    const auto dir = temp_dir("mixed_hash");
    const auto a = small_horses(5);
    const auto b = small_horses(6);

    pegasus::detect::FlagSet fa;
    fa.indices = {0, 1};
    fa.k = 2;
    fa.source = "lof";
    fa.n_points = a.size();
    pegasus::detect::FlagSet fb = fa;
    fb.source = "re";

    const std::string pa = (dir / "a.csv").string();
    const std::string pb = (dir / "b.csv").string();
    pegasus::detect::save_flags_csv(pa, fa, pegasus::data::dataset_hash(a));
    pegasus::detect::save_flags_csv(pb, fb, pegasus::data::dataset_hash(b));

    const CmdResult r = run_cli("combine --inputs " + pa + " " + pb + " --out " +
                                (dir / "u.csv").string());
    CHECK(r.code == 1);
    CHECK(r.output.find("different samples") != std::string::npos);
    fs::remove_all(dir);
}

}  // TEST_SUITE

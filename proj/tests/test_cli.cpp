// End-to-end checks of the command-line binary. The binary path comes
// from the SCREJECT_CLI environment variable set by the build.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "screject/data.hpp"

using namespace screject;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

std::string cli_path() {
    const char* path = std::getenv("SCREJECT_CLI");
    REQUIRE(path != nullptr);
    return path;
}

fs::path scratch_dir() {
    static int counter = 0;
    const fs::path dir = fs::temp_directory_path() /
                         ("screject-cli-" + std::to_string(::getpid()) + "-" +
                          std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

RunResult run(const std::string& args, const fs::path& capture) {
    const std::string cmd = cli_path() + " " + args + " >" + capture.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(capture);
    std::stringstream buf;
    buf << in.rdbuf();
    result.output = buf.str();
    return result;
}

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

// Four two-class samples whose MSP uncertainties are strictly ordered
// and whose third-most-confident prediction is wrong: the RC curve is
// (0.25,0), (0.5,0), (0.75,1/3), (1.0,0.25) and AURC is 7/48.
fs::path write_golden(const fs::path& dir) {
    std::vector<LogitRecord> records;
    records.push_back({{4.0, 0.0}, 0, ""});
    records.push_back({{3.0, 0.0}, 0, ""});
    records.push_back({{2.0, 0.0}, 1, ""});
    records.push_back({{1.0, 0.0}, 0, ""});
    const fs::path path = dir / "golden.logits";
    write_logit_records(path, records);
    return path;
}

}  // namespace

TEST_CASE("eval reproduces the golden metrics byte-stably") {
    const auto dir = scratch_dir();
    const auto golden = write_golden(dir);
    const std::string args = "eval --input " + golden.string() +
                             " --score msp --risks 0.10 --coverages 0.75 --out " +
                             (dir / "report.txt").string();
    const auto first = run(args, dir / "out1.txt");
    CHECK(first.exit_code == 0);
    CHECK(contains(first.output, "aurc=0.145833"));
    CHECK(contains(first.output, "coverage@risk=0.1=0.500000"));
    CHECK(contains(first.output, "risk@coverage=0.75=0.333333"));
    CHECK(contains(first.output, "error_rate=0.250000"));

    const auto second = run(args, dir / "out2.txt");
    CHECK(second.exit_code == 0);
    CHECK(second.output == first.output);

    std::ifstream report(dir / "report.txt");
    std::stringstream buf;
    buf << report.rdbuf();
    CHECK(buf.str() == first.output);
    fs::remove_all(dir);
}

TEST_CASE("eval usage and I/O failures use the documented exit codes") {
    const auto dir = scratch_dir();
    const auto golden = write_golden(dir);

    const auto no_val = run("eval --input " + golden.string() + " --score maxlogit-norm",
                            dir / "out.txt");
    CHECK(no_val.exit_code == 2);

    const auto missing = run("eval --input " + (dir / "absent.logits").string(),
                             dir / "out.txt");
    CHECK(missing.exit_code == 4);

    const auto bad_flag = run("eval --input " + golden.string() + " --score bogus",
                              dir / "out.txt");
    CHECK(bad_flag.exit_code == 2);

    const auto no_input = run("eval", dir / "out.txt");
    CHECK(no_input.exit_code == 2);
    fs::remove_all(dir);
}

TEST_CASE("eval with maxlogit-norm reports the chosen p") {
    const auto dir = scratch_dir();
    const auto golden = write_golden(dir);
    const auto result = run("eval --input " + golden.string() + " --score maxlogit-norm --val " +
                                golden.string(),
                            dir / "out.txt");
    CHECK(result.exit_code == 0);
    CHECK(contains(result.output, "p="));
    fs::remove_all(dir);
}

TEST_CASE("rc emits the golden table and an overlay svg") {
    const auto dir = scratch_dir();
    const auto golden = write_golden(dir);
    const auto result = run("rc --inputs " + golden.string() + " --out-dir " + dir.string() +
                                " --deterministic",
                            dir / "out.txt");
    CHECK(result.exit_code == 0);

    std::ifstream table(dir / "golden.rc.csv");
    std::string line;
    std::getline(table, line);
    CHECK(line == "coverage,risk,threshold");
    std::vector<std::string> rows;
    while (std::getline(table, line)) {
        rows.push_back(line);
    }
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].rfind("0.250000,0.000000,", 0) == 0);
    CHECK(rows[1].rfind("0.500000,0.000000,", 0) == 0);
    CHECK(rows[2].rfind("0.750000,0.333333,", 0) == 0);
    CHECK(rows[3].rfind("1.000000,0.250000,", 0) == 0);

    CHECK(fs::exists(dir / "rc.svg"));

    // Deterministic flag makes the SVG byte-stable.
    const auto again = run("rc --inputs " + golden.string() + " --out-dir " +
                               (dir / "again").string() + " --deterministic",
                           dir / "out2.txt");
    CHECK(again.exit_code == 0);
    std::ifstream a(dir / "rc.svg");
    std::ifstream b(dir / "again" / "rc.svg");
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
    fs::remove_all(dir);
}

TEST_CASE("rc rejects an empty logit file with exit 4") {
    const auto dir = scratch_dir();
    const fs::path empty = dir / "empty.logits";
    std::ofstream(empty) << "";
    const auto result = run("rc --inputs " + empty.string() + " --out-dir " + dir.string(),
                            dir / "out.txt");
    CHECK(result.exit_code == 4);
    fs::remove_all(dir);
}

TEST_CASE("train writes one dump directory per alpha, then eval consumes it") {
    const auto dir = scratch_dir();
    const std::string common = " --seed 7 --classes 4 --n-train 300 --n-val 100 --n-eval 100"
                               " --epochs 2 --hidden 8 --out " +
                               (dir / "models").string();
    const auto result = run("train --alphas 0,0.2" + common, dir / "out.txt");
    CHECK(result.exit_code == 0);
    for (const std::string alpha : {"alpha-0", "alpha-0.2"}) {
        const fs::path model_dir = dir / "models" / alpha;
        CHECK(fs::exists(model_dir / "train.logits"));
        CHECK(fs::exists(model_dir / "val.logits"));
        CHECK(fs::exists(model_dir / "eval.logits"));
        CHECK(fs::exists(model_dir / "manifest.txt"));
    }

    const auto eval = run("eval --input " + (dir / "models" / "alpha-0" / "eval.logits").string(),
                          dir / "out2.txt");
    CHECK(eval.exit_code == 0);
    CHECK(contains(eval.output, "aurc="));

    const auto analyze = run("analyze --input " +
                                 (dir / "models" / "alpha-0.2" / "eval.logits").string() +
                                 " --out-dir " + (dir / "analysis").string() +
                                 " --min-count 2 --deterministic",
                             dir / "out3.txt");
    CHECK(analyze.exit_code == 0);
    CHECK(fs::exists(dir / "analysis" / "vmax_conditional.csv"));
    CHECK(fs::exists(dir / "analysis" / "logit_profile.csv"));
    CHECK(fs::exists(dir / "analysis" / "analyze_manifest.txt"));
    fs::remove_all(dir);
}

TEST_CASE("train flag validation") {
    const auto dir = scratch_dir();
    const auto no_out = run("train --alphas 0", dir / "out.txt");
    CHECK(no_out.exit_code == 2);
    const auto bad_alpha = run("train --alphas 1.5 --out " + (dir / "m").string(),
                               dir / "out2.txt");
    CHECK(bad_alpha.exit_code == 2);
    fs::remove_all(dir);
}

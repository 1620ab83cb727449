#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "linedp/cli.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kFixture = std::string(LINEDP_TEST_DATA) + "/fixture.csv";

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    args.insert(args.begin(), "linedp");
    const int code = linedp::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> lines_of(const std::string& p) {
    std::istringstream in(slurp(p));
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_CASE("evaluate writes one row per method per fold") {
    TempDir dir("linedp_cli_eval");
    const auto r = cli({"evaluate", "--dataset", kFixture, "--setting", "within", "--folds", "3", "--repeats", "1",
                        "--lime-n", "300", "--out-dir", dir.path.string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto metrics = lines_of(dir / "metrics.csv");
    // two releases x three folds x four methods
    REQUIRE(metrics.size() == 1 + 24);
    CHECK(metrics[0] == "setting,method,unit_id,recall,far,d2h,mcc,recall_top20loc,ifa");
    const auto stats = lines_of(dir / "stats.csv");
    CHECK(stats.size() == 1 + 6 * 3);
}

TEST_CASE("cross-release evaluation uses consecutive releases") {
    TempDir dir("linedp_cli_cross");
    const auto r = cli({"evaluate", "--dataset", kFixture, "--setting", "cross", "--methods", "linedp,ngram",
                        "--lime-n", "300", "--out-dir", dir.path.string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto metrics = lines_of(dir / "metrics.csv");
    REQUIRE(metrics.size() == 3);
    CHECK(metrics[1].find("demo-1.0->demo-1.1") != std::string::npos);
}

TEST_CASE("train then predict is reproducible") {
    TempDir dir("linedp_cli_predict");
    REQUIRE(cli({"train", "--dataset", kFixture, "--releases", "demo-1.0", "--out", dir / "model.json"}).code == 0);
    for (const char* name : {"a.csv", "b.csv"}) {
        const auto r = cli({"predict", "--model", dir / "model.json", "--dataset", kFixture, "--release", "demo-1.1",
                            "--lime-n", "500", "--seed", "3", "--out", dir / name});
        REQUIRE_MESSAGE(r.code == 0, r.err);
    }
    const auto a = slurp(dir / "a.csv");
    CHECK(!a.empty());
    CHECK(a == slurp(dir / "b.csv"));
    CHECK(lines_of(dir / "a.csv")[0].rfind("release,file_path,line_number", 0) == 0);
}

TEST_CASE("sensitivity grids") {
    TempDir dir("linedp_cli_sens");
    auto r = cli({"sensitivity", "--dataset", kFixture, "--target", "k_risky", "--lime-n", "300", "--out",
                  dir / "k.csv"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(lines_of(dir / "k.csv").size() == 1 + 8);
    r = cli({"sensitivity", "--dataset", kFixture, "--target", "entropy_threshold", "--out", dir / "e.csv"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto e = lines_of(dir / "e.csv");
    CHECK(e.size() == 1 + 20);
    CHECK(e[0] == "target,setting,value,recall,far,d2h,mcc,recall_top20loc,ifa");
}

TEST_CASE("density report") {
    TempDir dir("linedp_cli_density");
    REQUIRE(cli({"density", "--dataset", kFixture, "--out", dir / "d.csv"}).code == 0);
    const auto d = lines_of(dir / "d.csv");
    REQUIRE(d.size() == 1 + 12);
    CHECK(d[0] == "release,file_path,file_label,loc,defective_lines,density");
}

TEST_CASE("exit codes separate usage errors from data errors") {
    TempDir dir("linedp_cli_errors");
    CHECK(cli({}).code == 1);
    CHECK(cli({"frobnicate"}).code == 1);
    CHECK(cli({"density", "--dataset", kFixture}).code == 1);
    CHECK(cli({"evaluate", "--dataset", kFixture, "--setting", "sideways", "--out-dir", dir.path.string()}).code == 1);
    CHECK(cli({"evaluate", "--dataset", kFixture, "--lime-n", "0", "--out-dir", dir.path.string()}).code == 1);

    std::ofstream(dir / "bad.csv") << "release,file_path\nx,y\n";
    const auto r = cli({"density", "--dataset", dir / "bad.csv", "--out", dir / "d.csv"});
    CHECK(r.code == 2);
    CHECK(!r.err.empty());
    CHECK(cli({"density", "--dataset", dir / "missing.csv", "--out", dir / "d.csv"}).code == 2);
}

TEST_CASE("flags override the config file") {
    TempDir dir("linedp_cli_config");
    std::ofstream(dir / "run.cfg") << "# small run\nlime_n = 300\nfolds = 3\nrepeats = 1\nk_risky = 5\n";
    auto r = cli({"evaluate", "--dataset", kFixture, "--setting", "within", "--methods", "random", "--config",
                  dir / "run.cfg", "--out-dir", dir.path.string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(lines_of(dir / "metrics.csv").size() == 1 + 6);
    r = cli({"evaluate", "--dataset", kFixture, "--setting", "within", "--methods", "random", "--config",
             dir / "run.cfg", "--folds", "2", "--out-dir", dir.path.string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(lines_of(dir / "metrics.csv").size() == 1 + 4);
    std::ofstream(dir / "bad.cfg") << "no_such_key = 1\n";
    CHECK(cli({"evaluate", "--dataset", kFixture, "--config", dir / "bad.cfg", "--out-dir", dir.path.string()}).code ==
          1);
}

TEST_CASE("mine labels a snapshot from commits") {
    TempDir dir("linedp_cli_mine");
    std::ofstream(dir / "issues.txt") << "DEMO-7\n";
    std::ofstream(dir / "commits.jsonl")
        << R"({"commit_id":"c1","message":"DEMO-7 fix cast","changes":[{"path":"src/Demo4.java","removed":[{"line":2,"content":"int item = count.get(index);"}]}]})"
        << "\n"
        << R"({"commit_id":"c2","message":"refactor","changes":[{"path":"src/Demo5.java","removed":[{"line":1,"content":"x"}]}]})"
        << "\n";
    // Take demo-1.0 line 2 of Demo4 verbatim so the removed line resolves.
    std::string target;
    for (const auto& l : lines_of(kFixture))
        if (l.rfind("demo-1.0,src/Demo4.java,2,", 0) == 0) target = l;
    REQUIRE(!target.empty());
    const auto content = target.substr(std::string("demo-1.0,src/Demo4.java,2,").size());
    const auto code_text = content.substr(0, content.find(",false"));
    std::ofstream(dir / "commits2.jsonl")
        << R"({"commit_id":"c1","message":"DEMO-7 fix","changes":[{"path":"src/Demo4.java","removed":[{"line":2,"content":")"
        << code_text << R"("}]}]})" << "\n";
    const auto r = cli({"mine", "--commits", dir / "commits2.jsonl", "--issues", dir / "issues.txt", "--snapshot",
                        kFixture, "--release", "demo-1.0", "--out", dir / "labeled.csv"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    int defective = 0;
    for (const auto& l : lines_of(dir / "labeled.csv")) defective += l.size() > 5 && l.substr(l.size() - 5) == ",true";
    CHECK(defective == 1);
    CHECK(cli({"mine", "--commits", dir / "commits.jsonl", "--issues", dir / "commits.jsonl", "--snapshot", kFixture,
               "--release", "demo-1.0", "--out", dir / "x.csv"})
              .code == 2);
}

TEST_CASE("installed binary answers --help") {
    const char* bin = std::getenv("LINEDP_CLI");
    if (bin == nullptr) return;
    const std::string cmd = std::string("\"") + bin + "\" --help > " +
                            (fs::temp_directory_path() / "linedp_help.txt").string() + " 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(slurp((fs::temp_directory_path() / "linedp_help.txt").string()).find("evaluate") != std::string::npos);
}

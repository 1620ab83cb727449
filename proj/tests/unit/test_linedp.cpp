#include <doctest.h>

#include "linedp/error.hpp"
#include "linedp/linedp.hpp"
#include "support/synthetic.hpp"

using namespace linedp;

namespace {

SourceFile file_of(std::string path, std::vector<std::string> lines) {
    SourceFile f;
    f.release_id = "r";
    f.path = std::move(path);
    for (std::size_t i = 0; i < lines.size(); ++i) f.lines.push_back(LineRecord{int(i + 1), lines[i], false});
    return f;
}

testing::PlantedSpec small_spec(const std::string& release, std::uint64_t seed) {
    testing::PlantedSpec s;
    s.release_id = release;
    s.seed = seed;
    s.files = 30;
    s.defective_files = 8;
    s.lines_per_file = 40;
    s.background_vocab = 600;
    s.defective_lines_per_file = 8;
    return s;
}

LineDpParams fast_params(std::uint64_t seed) {
    LineDpParams p;
    p.run_seed = seed;
    p.lime.samples = 1000;
    return p;
}

}  // namespace

TEST_CASE("risky tokens: positive only, top k, lexicographic ties") {
    const std::map<std::string, double> scores{{"a", 0.5}, {"b", -1.0}, {"c", 0.5}, {"d", 0.9}, {"e", 0.0}};
    const auto r = select_risky_tokens(scores, 2);
    REQUIRE(r.size() == 2);
    CHECK(r.tokens[0].first == "d");
    CHECK(r.tokens[1].first == "a");
    CHECK(select_risky_tokens(scores, 10).size() == 3);
    CHECK(select_risky_tokens(std::map<std::string, double>{{"x", -0.1}}, 5).empty());
    CHECK(r.score_of("d") == 0.9);
    CHECK_FALSE(r.score_of("b").has_value());
}

TEST_CASE("flag_lines counts distinct risky tokens per line") {
    RiskyTokenSet risky;
    risky.tokens = {{"buf", 0.6}, {"len", 0.3}};
    const auto f = file_of("A.java", {"buf[len] = buf[0];", "x = y;", "len++;", "buffer = lens;"});
    const auto flagged = flag_lines(f, risky, 0.8);
    REQUIRE(flagged.size() == 2);
    CHECK(flagged[0].line_number == 1);
    CHECK(flagged[0].hit_count == 2);
    CHECK(flagged[0].score_sum == doctest::Approx(0.9));
    CHECK(flagged[1].line_number == 3);
    CHECK(flagged[1].hit_count == 1);
    CHECK(flagged[1].file_probability == 0.8);
    CHECK(flag_lines(f, RiskyTokenSet{}, 0.9).empty());
}

TEST_CASE("global ranking order and tie-breaks") {
    std::vector<FlaggedLine> lines{
        {"r", "B.java", 4, 1, 0.5, 0.9},  //
        {"r", "A.java", 9, 2, 0.1, 0.6},  //
        {"r", "A.java", 3, 1, 0.9, 0.6},  //
        {"r", "A.java", 2, 1, 0.5, 0.9},  //
        {"r", "A.java", 1, 1, 0.5, 0.9},  //
    };
    const auto ranked = rank_lines_global(lines);
    REQUIRE(ranked.size() == 5);
    CHECK(ranked[0].line_number == 9);  // hit_count 2
    CHECK(ranked[1].line_number == 3);  // score 0.9
    CHECK(ranked[2].file_path == "A.java");
    CHECK(ranked[2].line_number == 1);
    CHECK(ranked[3].line_number == 2);
    CHECK(ranked[4].file_path == "B.java");
    for (std::size_t i = 0; i < ranked.size(); ++i) CHECK(ranked[i].global_rank == i + 1);
}

TEST_CASE("pipeline: planted tokens dominate the top of the ranking") {
    const auto train = testing::planted_release(small_spec("p-1.0", 3));
    const auto test = testing::planted_release(small_spec("p-1.1", 4));
    const auto res = run_linedp(train.files, test.files, fast_params(1));
    REQUIRE(res.ranking.size() >= 10);
    auto is_defective = [&](const RankedLine& r) {
        for (const auto& f : test.files) {
            if (f.path == r.file_path) return f.lines[r.line_number - 1].is_defective;
        }
        return false;
    };
    std::size_t defective_top = 0;
    double rank_bad = 0, rank_ok = 0, n_bad = 0, n_ok = 0;
    for (const auto& r : res.ranking) {
        const bool bad = is_defective(r);
        if (r.global_rank <= 10) defective_top += bad;
        (bad ? rank_bad : rank_ok) += static_cast<double>(r.global_rank);
        (bad ? n_bad : n_ok) += 1;
    }
    CHECK(defective_top >= 7);
    REQUIRE(n_bad > 0);
    REQUIRE(n_ok > 0);
    CHECK(rank_bad / n_bad < rank_ok / n_ok);
    for (std::size_t i = 0; i < res.files.size(); ++i) {
        CHECK(res.files[i].path == test.files[i].path);
        CHECK(res.files[i].explanation.has_value() == (res.files[i].probability > 0.5));
    }
}

TEST_CASE("pipeline: reruns and worker counts give identical results") {
    const auto train = testing::planted_release(small_spec("p-1.0", 5));
    const auto test = testing::planted_release(small_spec("p-1.1", 6));
    auto p1 = fast_params(9);
    p1.workers = 1;
    auto p3 = p1;
    p3.workers = 3;
    const auto a = run_linedp(train.files, test.files, p1);
    const auto b = run_linedp(train.files, test.files, p1);
    const auto c = run_linedp(train.files, test.files, p3);
    CHECK(a.ranking == b.ranking);
    CHECK(a.ranking == c.ranking);
}

TEST_CASE("pipeline: no predicted-defective files, empty ranking") {
    const auto train = testing::planted_release(small_spec("p-1.0", 7));
    auto test = testing::planted_release(small_spec("p-1.1", 8));
    std::vector<SourceFile> clean;
    for (const auto& f : test.files) {
        if (!f.file_label) clean.push_back(f);
    }
    const auto res = run_linedp(train.files, clean, fast_params(1));
    for (const auto& f : res.files) CHECK(f.probability <= 0.5);
    CHECK(res.ranking.empty());
}

TEST_CASE("pipeline: LIME budget below k_risky is rejected") {
    const auto train = testing::planted_release(small_spec("p-1.0", 7));
    auto p = fast_params(1);
    p.lime.k_features = 5;
    CHECK_THROWS_AS(run_linedp(train.files, train.files, p), ModelError);
}

TEST_CASE("sensitivity over k: nested, monotone recall and FAR") {
    const auto train = testing::planted_release(small_spec("p-1.0", 11));
    const auto test = testing::planted_release(small_spec("p-1.1", 12));
    const auto rows = sensitivity_k(train.files, test.files, kDefaultKGrid, fast_params(2));
    REQUIRE(rows.size() == 8);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].value > rows[i - 1].value);
        CHECK(*rows[i].metrics.recall >= *rows[i - 1].metrics.recall);
        CHECK(*rows[i].metrics.far >= *rows[i - 1].metrics.far);
    }
    CHECK_THROWS_AS(sensitivity_k(train.files, test.files, std::vector<std::size_t>{}, fast_params(2)), ModelError);
}

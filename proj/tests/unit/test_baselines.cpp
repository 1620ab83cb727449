#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "linedp/baselines.hpp"
#include "linedp/error.hpp"
#include "linedp/random.hpp"
#include "support/synthetic.hpp"

using namespace linedp;

namespace {

SourceFile file_of(std::string path, std::vector<std::string> lines, std::string release = "r") {
    SourceFile f;
    f.release_id = std::move(release);
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

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

TEST_CASE("random baseline: reproducible, seed-sensitive, predicted-defective files only") {
    const std::vector<SourceFile> files{file_of("A.java", {"a b c", "d e f", "g h i", "j k"}),
                                        file_of("B.java", {"a b", "c d"})};
    const std::vector<double> probs{0.9, 0.2};
    const auto a = random_baseline(files, probs, 3, 7);
    const auto b = random_baseline(files, probs, 3, 7);
    CHECK(a == b);
    for (const auto& r : a) CHECK(r.file_path == "A.java");
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].global_rank == i + 1);
    bool differs = false;
    for (std::uint64_t s = 8; s < 20 && !differs; ++s) differs = random_baseline(files, probs, 3, s) != a;
    CHECK(differs);
}

TEST_CASE("random baseline: median recall over 1000 seeds stays below LINE-DP") {
    const auto train = testing::planted_release(small_spec("p-1.0", 3));
    const auto test = testing::planted_release(small_spec("p-1.1", 4));
    LineDpParams params;
    params.lime.samples = 1000;
    params.run_seed = 1;
    const auto fm = train_file_model(train.files);
    const auto res = run_linedp(fm, test.files, params);
    const auto probs = res.probabilities();
    const LineUniverse universe(test.files, probs);
    const double ours = *evaluate_ranking(universe, res.ranking).recall;
    std::vector<double> random_recall;
    for (std::uint64_t s = 0; s < 1000; ++s)
        random_recall.push_back(*evaluate_ranking(universe, random_baseline(test.files, probs, 20, s)).recall);
    CHECK(median(random_recall) < ours);
}

TEST_CASE("TMI-LR: one global risky set recovering planted tokens") {
    const auto train = testing::planted_release(small_spec("p-1.0", 5));
    const auto test = testing::planted_release(small_spec("p-1.1", 6));
    const auto fm = train_file_model(train.files);
    const auto probs = predict_files(fm, test.files);
    const auto res = tmi_lr_baseline(fm, train.files, test.files, probs, 20);
    CHECK(res.risky.size() <= 20);
    std::size_t found = 0;
    for (const auto& t : testing::PlantedSpec{}.planted) found += res.risky.score_of(t).has_value();
    CHECK(found >= 2);
    for (const auto& r : res.ranking) {
        const auto it = std::find_if(test.files.begin(), test.files.end(),
                                     [&](const SourceFile& f) { return f.path == r.file_path; });
        REQUIRE(it != test.files.end());
        CHECK(probs[static_cast<std::size_t>(it - test.files.begin())] > 0.5);
    }
}

TEST_CASE("TMI-LR risky tokens: positive coefficients only") {
    const auto v = Vocabulary::from_tokens({"a", "b", "c"});
    const std::vector<double> coef{0.4, -1.0, 0.9};
    const auto r = tmi_lr_risky_tokens(v, coef, 5);
    REQUIRE(r.size() == 2);
    CHECK(r.tokens[0].first == "c");
    CHECK_THROWS_AS(tmi_lr_risky_tokens(v, std::vector<double>{1.0}, 5), ModelError);
}

TEST_CASE("n-gram: distributions normalise, with and without cache") {
    const auto corpus = testing::planted_release(small_spec("n-1.0", 9));
    const NgramModel m = NgramModel::train(corpus.files);
    const auto outcomes = m.outcomes();
    CHECK(outcomes.size() == m.outcome_count());
    Rng rng(2);
    NgramModel::Cache cache(m.config().order);
    std::vector<NgramModel::TokenId> history(5, NgramModel::kBegin);
    for (int step = 0; step < 60; ++step) {
        for (const NgramModel::Cache* c : {static_cast<const NgramModel::Cache*>(nullptr),
                                           static_cast<const NgramModel::Cache*>(&cache)}) {
            double sum = 0.0;
            for (auto id : outcomes) sum += m.probability(history, id, c);
            CHECK(std::abs(sum - 1.0) <= 1e-9);
        }
        const auto next = outcomes[rng.below(outcomes.size())];
        cache.observe(history, next);
        history.push_back(next);
        if (step % 7 == 0) history.push_back(history[history.size() - 3]);
    }
}

TEST_CASE("n-gram: deterministic continuation and unknown tokens") {
    std::vector<SourceFile> train{file_of("A.java", std::vector<std::string>(30, "open read close"))};
    const NgramModel m = NgramModel::train(train);
    std::vector<NgramModel::TokenId> h(5, NgramModel::kBegin);
    h.push_back(m.id_of("open"));
    h.push_back(m.id_of("read"));
    CHECK(-std::log2(m.probability(h, m.id_of("close"))) < 0.01);
    CHECK(m.id_of("never_seen") == NgramModel::kUnknown);
    CHECK(m.id_of("<s>") == NgramModel::kUnknown);
    CHECK(m.probability(h, NgramModel::kUnknown) > 0.0);
}

TEST_CASE("n-gram: unusual lines score higher, empty lines are not scored") {
    std::vector<SourceFile> train;
    for (int i = 0; i < 5; ++i) train.push_back(file_of("T" + std::to_string(i) + ".java", {"int i = 0;", "i++;", "return i;"}));
    const NgramModel m = NgramModel::train(train);
    const auto e = m.line_entropies(file_of("X.java", {"int i = 0;", "", "zork blarg quux;", "return i;"}));
    REQUIRE(e.size() == 4);
    CHECK_FALSE(e[1].has_value());
    REQUIRE(e[0].has_value());
    REQUIRE(e[2].has_value());
    CHECK(*e[2] > *e[0]);
    CHECK(*e[2] > *e[3]);
}

TEST_CASE("n-gram ranking: threshold is anti-monotone") {
    const auto train = testing::planted_release(small_spec("n-1.0", 13));
    const auto test = testing::planted_release(small_spec("n-1.1", 14));
    const auto scores = score_line_entropies(NgramModel::train(train.files), test.files);
    std::size_t prev = SIZE_MAX;
    for (double t : default_entropy_grid()) {
        const auto ranked = rank_by_entropy(scores, test.files, t);
        CHECK(ranked.size() <= prev);
        prev = ranked.size();
        for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i].score_sum <= ranked[i - 1].score_sum);
        for (const auto& r : ranked) CHECK(r.score_sum > t);
    }
    const auto grid = default_entropy_grid();
    REQUIRE(grid.size() == 20);
    CHECK(grid.front() == doctest::Approx(0.1));
    CHECK(grid.back() == doctest::Approx(2.0));
}

TEST_CASE("n-gram: scoring is independent of worker count") {
    const auto train = testing::planted_release(small_spec("n-1.0", 15));
    const auto test = testing::planted_release(small_spec("n-1.1", 16));
    const auto m = NgramModel::train(train.files);
    const auto a = score_line_entropies(m, test.files, 1);
    const auto b = score_line_entropies(m, test.files, 4);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].entropy == b[i].entropy);
}

TEST_CASE("n-gram configuration is validated") {
    std::vector<SourceFile> train{file_of("A.java", {"a b"})};
    CHECK_THROWS_AS(NgramModel::train(train, NgramConfig{0, 0.7, 0.5}), ModelError);
    CHECK_THROWS_AS(NgramModel::train(train, NgramConfig{3, 1.0, 0.5}), ModelError);
    CHECK_THROWS_AS(NgramModel::train(train, NgramConfig{3, 0.7, 1.0}), ModelError);
    CHECK_NOTHROW(NgramModel::train(train, NgramConfig{1, 0.7, 0.0}));
}

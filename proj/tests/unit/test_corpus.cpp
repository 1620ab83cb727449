#include <doctest.h>

#include <sstream>

#include "linedp/corpus.hpp"
#include "linedp/error.hpp"
#include "support/synthetic.hpp"

using namespace linedp;

namespace {

SourceFile make_file(std::string path, std::vector<std::string> lines, std::vector<int> defective = {}) {
    SourceFile f;
    f.release_id = "r-1.0";
    f.path = std::move(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const int n = static_cast<int>(i + 1);
        const bool bad = std::find(defective.begin(), defective.end(), n) != defective.end();
        f.lines.push_back(LineRecord{n, lines[i], bad});
    }
    f.file_label = !defective.empty();
    return f;
}

const char* kHeader = "release,file_path,line_number,line_content,file_label,line_label\n";

}  // namespace

TEST_CASE("tokenize splits on non-identifier characters and keeps case") {
    CHECK(tokenize("if(x==null){return;}") == std::vector<std::string>{"if", "x", "null", "return"});
    CHECK(tokenize("Foo foo FOO_1") == std::vector<std::string>{"Foo", "foo", "FOO_1"});
    CHECK(tokenize("a.b->c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("  ;; ").empty());
}

TEST_CASE("vocabulary drops singletons and orders tokens lexicographically") {
    const std::vector<SourceFile> files{make_file("A.java", {"b a a", "c"}), make_file("B.java", {"b d"})};
    const Vocabulary v = Vocabulary::build(files);
    REQUIRE(v.size() == 2);
    CHECK(v.token(0) == "a");
    CHECK(v.token(1) == "b");
    CHECK(v.counts() == std::vector<std::uint64_t>{2, 2});
    CHECK_FALSE(v.index_of("c").has_value());
    CHECK(v.index_of("b") == 1u);
}

TEST_CASE("vocabulary fingerprint depends only on the token list") {
    const auto v1 = Vocabulary::from_tokens({"a", "b"});
    const auto v2 = Vocabulary::from_tokens({"a", "b"}, {7, 9});
    const auto v3 = Vocabulary::from_tokens({"a", "c"});
    CHECK(v1.fingerprint() == v2.fingerprint());
    CHECK(v1.fingerprint() != v3.fingerprint());
}

TEST_CASE("empty vocabulary is an error") {
    const std::vector<SourceFile> files{make_file("A.java", {"a b c"})};
    CHECK_THROWS_AS(Vocabulary::build(files), ModelError);
}

TEST_CASE("vectorize counts in-vocabulary tokens") {
    const auto v = Vocabulary::from_tokens({"a", "b"});
    const auto x = vectorize(make_file("A.java", {"a a b", "zz a"}), v);
    CHECK(x.dimension == 2);
    CHECK(x.vocab_fingerprint == v.fingerprint());
    CHECK(x.count(0) == 3);
    CHECK(x.count(1) == 1);
    CHECK(x.total_count() == 4);
    CHECK(vectorize(make_file("B.java", {"zz"}), v).empty());
}

TEST_CASE("dataset CSV round trip") {
    ReleaseDataset rel;
    rel.release_id = "r-1.0";
    rel.files = {make_file("A.java", {"int a = \"x,y\";", "", "return a;"}, {3}), make_file("B.java", {"b"})};
    std::ostringstream out;
    write_dataset(out, std::span<const ReleaseDataset>(&rel, 1));
    std::istringstream in(out.str());
    const auto back = read_dataset(in);
    REQUIRE(back.size() == 1);
    CHECK(back[0].files == rel.files);
    CHECK(back[0].system == "r");
}

TEST_CASE("loader sorts files by path and keeps release order") {
    std::istringstream in(std::string(kHeader) +
                          "r2,B.java,1,x,false,false\n"
                          "r1,Z.java,1,x,false,false\n"
                          "r1,A.java,1,x,true,true\n");
    const auto rels = read_dataset(in);
    REQUIRE(rels.size() == 2);
    CHECK(rels[0].release_id == "r2");
    CHECK(rels[1].files[0].path == "A.java");
    CHECK(rels[1].files[1].path == "Z.java");
}

TEST_CASE("loader rejects schema violations with the record named") {
    auto fails_with = [](const std::string& body, const std::string& needle) {
        std::istringstream in(body);
        try {
            read_dataset(in, "data.csv");
        } catch (const DataError& e) {
            const std::string msg = e.what();
            CHECK_MESSAGE(msg.find(needle) != std::string::npos, msg);
            return;
        }
        FAIL("no DataError for: " << body);
    };
    fails_with("release,file_path,line_number,file_label,line_label\n", "line_content");
    fails_with(std::string(kHeader) + "r,A.java,1,x,false,false\nr,A.java,3,y,false,false\n", "A.java");
    fails_with(std::string(kHeader) + "r,A.java,1,x,false,true\n", "A.java");
    fails_with(std::string(kHeader) + "r,A.java,0,x,false,false\n", "line_number");
    fails_with(std::string(kHeader) + "r,A.java,1,x,maybe,false\n", "data.csv");
    fails_with(std::string(kHeader) + "r,A.java,1,x,true,false\n", "A.java");
}

TEST_CASE("release metadata attaches dates and systems") {
    std::vector<ReleaseDataset> rels(2);
    rels[0].release_id = "activemq-5.0.0";
    rels[1].release_id = "camel-1.4.0";
    std::istringstream meta("release,release_date,system\nactivemq-5.0.0,2007-12-01,\ncamel-1.4.0,2008-07-01,camel\n");
    apply_release_metadata(rels, read_release_metadata(meta));
    REQUIRE(rels[0].release_date.has_value());
    CHECK(format_date(*rels[0].release_date) == "2007-12-01");
    CHECK(rels[0].system == "activemq");
    CHECK(rels[1].system == "camel");
    CHECK_THROWS_AS(parse_date("2007-13-01"), DataError);
    CHECK_THROWS_AS(parse_date("07-12-01"), DataError);
}

TEST_CASE("default system strips the version suffix") {
    CHECK(default_system_of("activemq-5.0.0") == "activemq");
    CHECK(default_system_of("hive-0.9.0") == "hive");
    CHECK(default_system_of("plain") == "");
}

TEST_CASE("defect density") {
    CHECK(defect_density(make_file("A.java", {"a", "b", "c", "d"}, {2})) == doctest::Approx(0.25));
    SourceFile empty;
    CHECK_THROWS_AS(defect_density(empty), DataError);
}

TEST_CASE("published layout import derives labels from line rows") {
    std::istringstream files("File,Bug,SRC\nsrc/A.java,True,\"int a;\r\nint b;\nint c;\"\nsrc/B.java,False,x\n");
    std::istringstream lines("File,Commit,Line_number,Line\nsrc/A.java,abc,2,int b;\nsrc/C.java,abc,1,q\n");
    PublishedImportStats stats;
    const auto rel = import_published_release(files, lines, "sys-1.0", &stats);
    REQUIRE(rel.files.size() == 2);
    const auto& a = rel.files[0];
    CHECK(a.path == "src/A.java");
    REQUIRE(a.lines.size() == 3);
    CHECK(a.lines[0].content == "int a;");
    CHECK(a.lines[1].is_defective);
    CHECK(a.file_label);
    CHECK_FALSE(rel.files[1].file_label);
    CHECK(stats.defective_lines == 1);
    CHECK(stats.unmatched_line_rows == 1);
    CHECK(stats.label_disagreements == 0);
}

TEST_CASE("planted corpus satisfies the dataset invariants") {
    const auto rel = testing::planted_release({});
    std::ostringstream out;
    write_dataset(out, std::span<const ReleaseDataset>(&rel, 1));
    std::istringstream in(out.str());
    const auto back = read_dataset(in);
    REQUIRE(back.size() == 1);
    CHECK(back[0].files == rel.files);
    std::size_t defective = 0;
    for (const auto& f : rel.files) defective += f.file_label;
    CHECK(defective == 15);
}

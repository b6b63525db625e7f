#include "phyloalg/dataset.hpp"
#include "phyloalg/error.hpp"

#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <sstream>

using namespace phyloalg;

namespace {

TraitTable table_from(const std::string& text, Dialect d = Dialect::Sswl, TableFormat f = TableFormat::Tsv) {
    std::istringstream in(text);
    return parse_table(in, f, d, "test");
}

Rational q(long p, long d) {
    Rational r(p, d);
    r.canonicalize();
    return r;
}

} // namespace

TEST_CASE("patterns are big-endian over the leaf order", "[dataset]") {
    CHECK(parse_pattern("0110") == 6);
    CHECK(pattern_string(6, 4) == "0110");
    CHECK(pattern_string(1, 5) == "00001");
    CHECK_THROWS_AS(parse_pattern("01a"), ParseError);
    CHECK_THROWS_AS(parse_pattern(""), ParseError);
}

TEST_CASE("table parsing", "[dataset]") {
    SECTION("SSWL dialect: 0 means absent") {
        TraitTable t = table_from("lang\tv1\tv2\tv3\nA\t1\t0\t?\nB\t+1\t1\t0\n");
        REQUIRE(t.languages == std::vector<std::string>{"A", "B"});
        REQUIRE(t.variables.size() == 3);
        CHECK(t.cells[0][0] == Cell::Plus);
        CHECK(t.cells[0][1] == Cell::Minus);
        CHECK(t.cells[0][2] == Cell::Unknown);
        CHECK(t.cells[1][0] == Cell::Plus);
    }
    SECTION("LanGeLin dialect: 0 means undefined") {
        TraitTable t = table_from("lang\tv1\tv2\tv3\nA\t1\t-1\t0\n", Dialect::Langelin);
        CHECK(t.cells[0][0] == Cell::Plus);
        CHECK(t.cells[0][1] == Cell::Minus);
        CHECK(t.cells[0][2] == Cell::Zero);
    }
    SECTION("a dialect directive overrides the default") {
        TraitTable t = table_from("#dialect\tlangelin\nlang\tv1\nA\t0\n", Dialect::Sswl);
        CHECK(t.cells[0][0] == Cell::Zero);
    }
    SECTION("CSV") {
        TraitTable t = table_from("lang,v1,v2\nA,1,0\n", Dialect::Sswl, TableFormat::Csv);
        CHECK(t.cells[0][1] == Cell::Minus);
        CHECK(format_for_path("x/table.CSV") == TableFormat::Csv);
        CHECK(format_for_path("x/table.tsv") == TableFormat::Tsv);
    }
    SECTION("errors name the position") {
        CHECK_THROWS_AS(table_from("lang\tv1\tv2\nA\t1\n"), ParseError);
        CHECK_THROWS_AS(table_from("lang\tv1\tv1\nA\t1\t0\n"), ParseError);
        CHECK_THROWS_AS(table_from("lang\tv1\nA\t1\nA\t0\n"), ParseError);
        CHECK_THROWS_AS(table_from("lang\nA\n"), ParseError);
        CHECK_THROWS_AS(table_from(""), ParseError);
        CHECK_THROWS_AS(table_from("lang\tv1\nA\t-1\n", Dialect::Sswl), ParseError);
        try {
            table_from("lang\tv1\tv2\nA\t1\tx\n");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            std::string msg = e.what();
            CHECK(msg.find("test:2") != std::string::npos);
            CHECK(msg.find("column 3") != std::string::npos);
        }
        CHECK_THROWS_AS(load_table("/nonexistent.tsv", TableFormat::Tsv, Dialect::Sswl), ValidationError);
    }
}

TEST_CASE("restriction to completely mapped variables", "[dataset]") {
    TraitTable t = table_from("#dialect\tlangelin\nlang\tv1\tv2\tv3\tv4\nA\t1\t0\t-1\t1\nB\t-1\t1\t?\t1\nC\t1\t1\t1\t-1\n");
    TraitTable r = completely_mapped(t, {"C", "A"});
    CHECK(r.languages == std::vector<std::string>{"C", "A"});
    CHECK(r.variables == std::vector<std::string>{"v1", "v3", "v4"});
    CHECK(completely_mapped(t, {"A", "B"}).variables == std::vector<std::string>{"v1", "v4"});
    CHECK_THROWS_AS(completely_mapped(t, {"A", "Z"}), ValidationError);
    CHECK_THROWS_AS(completely_mapped(t, {"A", "A"}), ValidationError);

    TraitTable none = completely_mapped(table_from("lang\tv1\nA\t?\nB\t1\n"), {"A", "B"});
    CHECK(none.variables.empty());
    CHECK_THROWS_AS(boundary_distribution(count_patterns(none)), ValidationError);
}

TEST_CASE("counts and boundary distributions", "[dataset]") {
    TraitTable t = table_from("lang\tv1\tv2\tv3\tv4\nA\t1\t1\t0\t1\nB\t0\t0\t0\t0\nC\t1\t1\t1\t1\n");
    PatternCounts c = count_patterns(t);
    CHECK(c.total == 4);
    CHECK(c.counts.at(parse_pattern("101")) == 3);
    CHECK(c.counts.at(parse_pattern("001")) == 1);
    BoundaryDistribution p = boundary_distribution(c);
    CHECK(p.at(parse_pattern("101")) == q(3, 4));
    CHECK(p.at(parse_pattern("000")) == 0);
    CHECK(p.total() == 1);
}

TEST_CASE("germanic fixture reproduces the occurrence counts", "[dataset]") {
    TraitTable t = load_table(testing::data_path("s1/table.tsv"), TableFormat::Tsv, Dialect::Sswl);
    TraitTable m = completely_mapped(t, load_leaf_order(testing::data_path("s1/languages.txt")));
    PatternCounts c = count_patterns(m);
    CHECK(c.total == 90);
    CHECK(c.counts.at(parse_pattern("000000")) == 40);
    CHECK(c.counts.at(parse_pattern("111111")) == 22);
    CHECK(c.counts.at(parse_pattern("110111")) == 3);
    CHECK(c.counts.size() == 18);
}

TEST_CASE("weighted boundary distributions", "[dataset]") {
    TraitTable t = table_from("lang\tv1\tv2\tv3\nA\t1\t1\t0\nB\t0\t1\t0\n");
    VariableWeighting w;
    w.weights = {{"v1", q(1, 2)}, {"v2", q(1, 4)}, {"v3", q(1, 4)}};
    CHECK(weight_normalizer(t, w) == 1);
    BoundaryDistribution p = weighted_boundary_distribution(t, w);
    CHECK(p.at(parse_pattern("10")) == q(1, 2));
    CHECK(p.at(parse_pattern("11")) == q(1, 4));
    CHECK(p.at(parse_pattern("00")) == q(1, 4));

    SECTION("uniform weights give the unweighted distribution") {
        VariableWeighting u;
        u.weights = {{"v1", 3}, {"v2", 3}, {"v3", 3}};
        CHECK(weighted_boundary_distribution(t, u).p == boundary_distribution(count_patterns(t)).p);
    }
    SECTION("invalid weights") {
        VariableWeighting missing;
        missing.weights = {{"v1", 1}};
        CHECK_THROWS_AS(weighted_boundary_distribution(t, missing), ValidationError);
        VariableWeighting negative = w;
        negative.weights["v2"] = -1;
        CHECK_THROWS_AS(weighted_boundary_distribution(t, negative), ValidationError);
        VariableWeighting zero;
        zero.weights = {{"v1", 0}, {"v2", 0}, {"v3", 0}};
        CHECK_THROWS_AS(weighted_boundary_distribution(t, zero), ValidationError);
    }
}

TEST_CASE("distribution files", "[dataset]") {
    SECTION("probabilities round-trip") {
        std::istringstream in("#leaves\tA\tB\n00\t1/2\n11\t0.25\n01\t1/4\n");
        BoundaryDistribution p = parse_distribution(in);
        std::ostringstream out;
        write_distribution(out, p);
        CHECK(out.str() == "#leaves\tA\tB\n00\t1/2\n01\t1/4\n11\t1/4\n");
        std::istringstream back(out.str());
        CHECK(parse_distribution(back).p == p.p);
    }
    SECTION("counts are normalized") {
        std::istringstream in("#leaves\tA\tB\n#kind\tcounts\n00\t3\n11\t1\n");
        BoundaryDistribution p = parse_distribution(in);
        CHECK(p.at(0) == q(3, 4));
    }
    SECTION("errors") {
        auto bad = [](const std::string& s) {
            std::istringstream in(s);
            return parse_distribution(in);
        };
        CHECK_THROWS_AS(bad("00\t1\n"), ParseError);
        CHECK_THROWS_AS(bad("#leaves\tA\tB\n000\t1\n"), ParseError);
        CHECK_THROWS_AS(bad("#leaves\tA\tB\n00\t1/2\n00\t1/2\n"), ParseError);
        CHECK_THROWS_AS(bad("#leaves\tA\tB\n00\t1/2\n"), ValidationError);
        CHECK_THROWS_AS(bad("#leaves\tA\tB\n00\t-1\n11\t2\n"), ParseError);
        CHECK_THROWS_AS(bad("#leaves\tA\tA\n00\t1\n"), ParseError);
    }
}

TEST_CASE("leaf reordering and digests", "[dataset]") {
    std::istringstream in("#leaves\tA\tB\tC\n100\t1/2\n110\t1/3\n001\t1/6\n");
    BoundaryDistribution p = parse_distribution(in);
    BoundaryDistribution r = reorder_leaves(p, {"C", "A", "B"});
    CHECK(r.at(parse_pattern("010")) == q(1, 2));
    CHECK(r.at(parse_pattern("011")) == q(1, 3));
    CHECK(r.at(parse_pattern("100")) == q(1, 6));
    CHECK(reorder_leaves(r, {"A", "B", "C"}).p == p.p);
    CHECK_THROWS_AS(reorder_leaves(p, {"A", "B"}), LeafMismatchError);
    CHECK_THROWS_AS(reorder_leaves(p, {"A", "B", "D"}), LeafMismatchError);

    CHECK(distribution_digest(p) == distribution_digest(p));
    CHECK(distribution_digest(p) != distribution_digest(r));
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

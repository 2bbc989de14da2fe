#include <gtest/gtest.h>

#include <random>
#include <set>
#include <string>

#include "oracles.hpp"
#include "phenomap/error.hpp"
#include "phenomap/ontology.hpp"

using namespace phenomap;
namespace pt = phenomap::testing;

namespace {

OntologyGraph chain() {
    return parse_obo(
        "[Term]\nid: A\nname: alpha\nis_a: B ! beta\n\n"
        "[Term]\nid: B\nname: beta\nis_a: C\n\n"
        "[Term]\nid: C\nname: gamma\n");
}

CategorySet cats(const OntologyGraph& g, std::vector<std::string> ids) {
    std::vector<Category> entries;
    for (auto& id : ids) entries.push_back({id, id});
    return CategorySet(g, std::move(entries));
}

std::string error_of(const std::string& obo) {
    try {
        parse_obo(obo);
    } catch (const InputError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(ParseObo, MinimalStanza) {
    const auto g = parse_obo("[Term]\nid: A\nname: alpha\n");
    ASSERT_EQ(g.size(), 1u);
    EXPECT_EQ(g.name(0), "alpha");
    EXPECT_TRUE(g.parents(0).empty());
}

TEST(ParseObo, IsAEdgeWithCommentStripped) {
    const auto g = parse_obo("[Term]\nid: A\nis_a: B ! beta\n\n[Term]\nid: B\nname: beta\n");
    const auto a = g.require("A");
    ASSERT_EQ(g.parents(a).size(), 1u);
    EXPECT_EQ(g.id(g.parents(a)[0]), "B");
}

TEST(ParseObo, ObsoleteTermIsDroppedAndEdgesIntoItDangle) {
    const auto g = parse_obo("[Term]\nid: A\n\n[Term]\nid: O\nis_obsolete: true\n");
    EXPECT_FALSE(g.contains("O"));
    const auto msg = error_of("[Term]\nid: A\nis_a: O\n\n[Term]\nid: O\nis_obsolete: true\n");
    EXPECT_NE(msg.find("O"), std::string::npos);
}

TEST(ParseObo, DanglingIdsAreAllListed) {
    const auto msg = error_of("[Term]\nid: A\nis_a: X1\n\n[Term]\nid: B\nis_a: X2\n");
    EXPECT_NE(msg.find("X1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("X2"), std::string::npos) << msg;
}

TEST(ParseObo, DuplicateIdNamed) {
    const auto msg = error_of("[Term]\nid: A\n\n[Term]\nid: A\n");
    EXPECT_NE(msg.find("A"), std::string::npos);
}

TEST(ParseObo, CycleNamesAMember) {
    const auto msg = error_of("[Term]\nid: A\nis_a: B\n\n[Term]\nid: B\nis_a: A\n");
    EXPECT_FALSE(msg.empty());
    EXPECT_TRUE(msg.find("A") != std::string::npos || msg.find("B") != std::string::npos);
}

TEST(ParseObo, NonIsARelationsAndTypedefsIgnored) {
    const auto g = parse_obo(
        "format-version: 1.2\n\n[Term]\nid: A\nrelationship: part_of B\n\n[Term]\nid: B\n\n"
        "[Typedef]\nid: part_of\nis_a: nothing\n");
    EXPECT_EQ(g.size(), 2u);
    EXPECT_TRUE(g.parents(g.require("A")).empty());
}

TEST(Ancestors, RootIsEmptyAndChainIsTransitive) {
    const auto g = chain();
    EXPECT_TRUE(ancestors(g, "C").empty());
    EXPECT_EQ(ancestors(g, "A"), (std::set<std::string>{"B", "C"}));
    EXPECT_THROW(ancestors(g, "Z"), InputError);
}

TEST(Ancestors, MatchesClosureOracleOnRandomDags) {
    for (std::uint32_t seed = 1; seed <= 5; ++seed) {
        const auto dag = pt::random_dag(50, seed);
        const auto g = pt::to_graph(dag);
        const auto reach = pt::closure_oracle(dag);
        for (std::size_t i = 0; i < 50; ++i) {
            std::set<std::string> expect;
            for (std::size_t j = 0; j < 50; ++j) {
                if (reach[i][j]) expect.insert(dag.ids[j]);
            }
            EXPECT_EQ(ancestors(g, dag.ids[i]), expect) << "seed " << seed << " node " << i;
        }
    }
}

TEST(Subsume, CategoryMapsToItself) {
    const auto g = chain();
    const auto c = cats(g, {"B", "C"});
    EXPECT_EQ(subsume(g, c, "B"), "B");
    EXPECT_EQ(subsume(g, c, "C"), "C");
}

TEST(Subsume, ChainToDistantCategory) {
    const auto g = chain();
    EXPECT_EQ(subsume(g, cats(g, {"C"}), "A"), "C");
}

TEST(Subsume, NearestWinsOverFartherCategory) {
    const auto g = chain();
    EXPECT_EQ(subsume(g, cats(g, {"C", "B"}), "A"), "B");
}

TEST(Subsume, TieGoesToFirstListedCategory) {
    const auto g = parse_obo("[Term]\nid: A\nis_a: B\nis_a: C\n\n[Term]\nid: B\n\n[Term]\nid: C\n");
    EXPECT_EQ(subsume(g, cats(g, {"B", "C"}), "A"), "B");
    EXPECT_EQ(subsume(g, cats(g, {"C", "B"}), "A"), "C");
}

TEST(Subsume, NoCategoryAboveGivesNone) {
    const auto g = chain();
    EXPECT_EQ(subsume(g, cats(g, {"A"}), "B"), std::nullopt);
    EXPECT_THROW(subsume(g, cats(g, {"A"}), "Q"), InputError);
}

TEST(Subsume, MatchesOracleAndIsSoundOnRandomDags) {
    for (std::uint32_t seed = 10; seed < 15; ++seed) {
        const auto dag = pt::random_dag(50, seed);
        const auto g = pt::to_graph(dag);
        const auto reach = pt::closure_oracle(dag);
        std::mt19937 rng(seed);
        std::vector<std::size_t> pool(50);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        std::shuffle(pool.begin(), pool.end(), rng);
        std::vector<std::size_t> cat_nodes(pool.begin(), pool.begin() + 8);
        std::vector<std::string> cat_ids;
        for (auto c : cat_nodes) cat_ids.push_back(dag.ids[c]);
        const auto set = cats(g, cat_ids);
        for (std::size_t t = 0; t < 50; ++t) {
            const auto got = subsume(g, set, dag.ids[t]);
            const auto want = pt::subsume_oracle(dag, cat_nodes, t);
            ASSERT_EQ(got.has_value(), want.has_value()) << "node " << t;
            if (!got) continue;
            EXPECT_EQ(*got, dag.ids[*want]);
            if (*got != dag.ids[t]) {
                EXPECT_TRUE(reach[t][*want]);
            }
        }
        for (const auto& id : cat_ids) EXPECT_EQ(subsume(g, set, id), id);
    }
}

TEST(ReduceTerms, SetSemanticsAndEmptyInput) {
    const auto g = chain();
    const auto c = cats(g, {"C"});
    const auto r = reduce_terms(g, c, {"A", "B"});
    EXPECT_EQ(r.categories, (std::vector<std::string>{"C"}));
    EXPECT_TRUE(reduce_terms(g, c, {}).categories.empty());
}

TEST(ReduceTerms, CountsDroppedAndUnknown) {
    const auto g = chain();
    const auto r = reduce_terms(g, cats(g, {"B"}), {"A", "C", "ZZ"});
    EXPECT_EQ(r.categories, (std::vector<std::string>{"B"}));
    EXPECT_EQ(r.dropped, 1u);
    EXPECT_EQ(r.unknown, 1u);
    EXPECT_EQ(r.unknown_terms, (std::vector<std::string>{"ZZ"}));
    EXPECT_THROW(reduce_terms(g, cats(g, {"B"}), {"A", "ZZ"}, true), InputError);
}

TEST(ReduceTerms, UnionOfPerTermOracleOnRandomDag) {
    const auto dag = pt::random_dag(60, 99);
    const auto g = pt::to_graph(dag);
    const std::vector<std::size_t> cat_nodes = {0, 3, 7, 12, 20, 31};
    std::vector<std::string> cat_ids;
    for (auto c : cat_nodes) cat_ids.push_back(dag.ids[c]);
    const auto set = cats(g, cat_ids);
    std::mt19937 rng(5);
    std::uniform_int_distribution<std::size_t> pick(0, 59);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::string> terms;
        std::set<std::size_t> expect_pos;
        for (int k = 0; k < 20; ++k) {
            const auto t = pick(rng);
            terms.push_back(dag.ids[t]);
            if (auto c = pt::subsume_oracle(dag, cat_nodes, t)) {
                expect_pos.insert(std::find(cat_nodes.begin(), cat_nodes.end(), *c) - cat_nodes.begin());
            }
        }
        const auto r = reduce_terms(g, set, terms);
        EXPECT_EQ(std::vector<std::size_t>(expect_pos.begin(), expect_pos.end()), r.positions);
        EXPECT_LE(r.categories.size(), std::min(terms.size(), set.size()));
    }
}

TEST(Categories, ParsesLabelsCommentsAndWarnsOnNesting) {
    const auto g = chain();
    Warnings w;
    const auto set = parse_categories("# header\nB\tbeta label\n\nC\n", g, &w);
    ASSERT_EQ(set.size(), 2u);
    EXPECT_EQ(set[0].label, "beta label");
    EXPECT_EQ(set[1].label, "gamma");
    EXPECT_FALSE(w.empty());
    EXPECT_THROW(parse_categories("B\nB\n", g), InputError);
    EXPECT_THROW(parse_categories("Q\n", g), InputError);
}

TEST(Categories, FixtureLoads) {
    const auto g = parse_obo(pt::slurp(pt::data_path("three_clusters/ontology.obo")));
    Warnings w;
    const auto set = parse_categories(pt::slurp(pt::data_path("three_clusters/categories.txt")), g, &w);
    EXPECT_EQ(set.size(), 12u);
    EXPECT_TRUE(w.empty());
    EXPECT_EQ(subsume(g, set, "TST:3000101"), "TST:1000001");
    EXPECT_EQ(subsume(g, set, "TST:0009999"), std::nullopt);
}

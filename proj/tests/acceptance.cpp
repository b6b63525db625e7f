// Acceptance checks: one PASS/FAIL line per criterion.  A failing line lists
// every mismatch found.  The exit status is nonzero when any criterion fails.

#include "cli.hpp"

#include "phyloalg/dataset.hpp"
#include "phyloalg/flatten.hpp"
#include "phyloalg/invariants.hpp"
#include "phyloalg/markov.hpp"
#include "phyloalg/ranking.hpp"
#include "phyloalg/spectral.hpp"
#include "phyloalg/tree.hpp"

#include "support.hpp"

#include <json.hpp>

#include <cmath>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace phyloalg;

namespace {

class Check {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok) failures_.push_back(what);
    }
    void exact(const std::optional<Rational>& got, const std::string& want, const std::string& what) {
        Rational w = parse_rational(want);
        if (!got)
            failures_.push_back(what + " missing (want " + want + ")");
        else if (*got != w)
            failures_.push_back(what + " " + to_pq(*got) + " != " + to_pq(w));
    }
    void near(double got, double want, double tol, const std::string& what) {
        if (!(std::fabs(got - want) <= tol)) {
            std::ostringstream s;
            s.precision(6);
            s << what << ' ' << got << " != " << want << " (tol " << tol << ')';
            failures_.push_back(s.str());
        }
    }
    const std::vector<std::string>& failures() const { return failures_; }

private:
    std::vector<std::string> failures_;
};

const std::vector<Criterion> kAll{Criterion::Linf, Criterion::L1, Criterion::Dist};

const CandidateScore& candidate(const RankingReport& r, const std::string& id) {
    for (const auto& c : r.candidates)
        if (c.id == id) return c;
    throw std::runtime_error("no candidate " + id);
}

BoundaryDistribution from_table(const std::string& table, Dialect d, const std::vector<std::string>& order,
                                std::size_t* n_variables = nullptr, PatternCounts* counts = nullptr) {
    TraitTable t = completely_mapped(load_table(testing::data_path(table), TableFormat::Tsv, d), order);
    PatternCounts c = count_patterns(t);
    if (n_variables) *n_variables = t.variables.size();
    if (counts) *counts = c;
    return boundary_distribution(c);
}

std::string run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    if (code != 0) throw std::runtime_error("phyloalg " + args.front() + " exited " + std::to_string(code) + ": " + err.str());
    return out.str();
}

// Tab-separated rows of CLI output, comment lines dropped.
std::vector<std::vector<std::string>> tsv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, '\t');) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

// 1: Germanic conditional invariants, exact.
void germanic_invariants(Check& c) {
    BoundaryDistribution p = from_table("s1/table.tsv", Dialect::Sswl, load_leaf_order(testing::data_path("s1/languages.txt")));
    auto trees = load_tree_file(testing::data_path("s1/trees.nwk"));
    RankingReport r = rank(p, {trees[0], trees[1], trees[2]}, kAll, true);
    const char* want[3][3] = {{"pars1", "22/18225", "3707/364500"},
                              {"pars2", "419/364500", "2719/364500"},
                              {"pars3", "22/18225", "949/91125"}};
    for (const auto& w : want) {
        c.exact(candidate(r, w[0]).linf, w[1], std::string(w[0]) + " linf");
        c.exact(candidate(r, w[0]).l1, w[2], std::string(w[0]) + " l1");
    }
}

// 2: Germanic distances and the distance winner.
void germanic_distances(Check& c) {
    BoundaryDistribution p = from_table("s1/table.tsv", Dialect::Sswl, load_leaf_order(testing::data_path("s1/languages.txt")));
    auto trees = load_tree_file(testing::data_path("s1/trees.nwk"));
    RankingReport r = rank(p, {trees[0], trees[1], trees[2]}, kAll, true);
    const std::pair<const char*, double> want[3] = {{"pars1", 0.46768e-3}, {"pars2", 0.24424e-3}, {"pars3", 0.51457e-3}};
    for (const auto& [id, d] : want) c.near(*candidate(r, id).dist_sq_lb, d, 1e-7, std::string(id) + " dist_sq");
    c.expect(r.winners.at(Criterion::Dist).id == "pars2", "distance winner " + r.winners.at(Criterion::Dist).id + " != pars2");
}

// 3: Longobardi parameters end to end.
void longobardi(Check& c) {
    std::size_t n_vars = 0;
    PatternCounts counts;
    BoundaryDistribution p = from_table("longobardi/table.tsv", Dialect::Langelin,
                                        load_leaf_order(testing::data_path("longobardi/languages.txt")), &n_vars, &counts);
    c.expect(n_vars == 42, "completely mapped variables " + std::to_string(n_vars) + " != 42");
    std::vector<std::uint64_t> sizes;
    for (const auto& [pat, k] : counts.counts) sizes.push_back(k);
    std::sort(sizes.rbegin(), sizes.rend());
    c.expect(sizes == std::vector<std::uint64_t>{24, 12, 1, 1, 1, 1, 1, 1}, "pattern counts are not 24, 12 and six ones");

    RankingReport r = rank(p, load_tree_file(testing::data_path("longobardi/trees.nwk")), kAll, true);
    const char* l1[6] = {"83/8232", "233/24696", "16/3087", "181/18522", "233/24696", "83/8232"};
    for (int i = 0; i < 6; ++i) {
        std::string id = "T" + std::to_string(i + 1);
        c.exact(candidate(r, id).l1, l1[i], id + " l1");
    }
    c.exact(candidate(r, "T3").linf, "1/3087", "T3 linf");
    const double dist[4] = {0.58597e-3, 0.57831e-3, 0.30245e-4, 0.58595e-3};
    for (int i = 0; i < 4; ++i) {
        std::string id = "T" + std::to_string(i + 1);
        c.near(*candidate(r, id).dist_sq_lb, dist[i], 1e-7, id + " dist_sq");
    }
    for (Criterion k : {Criterion::L1, Criterion::Dist}) {
        const Winner& w = r.winners.at(k);
        c.expect(w.id == "T3" && !w.tie(), std::string(criterion_name(k)) + " winner " + w.id + (w.tie() ? " (tied)" : "") + " != T3");
    }
}

// 4: SSWL probability table, and the linf/l1 winner disagreement.
void sswl(Check& c) {
    BoundaryDistribution p = load_distribution(testing::data_path("sswl7/distribution.tsv"));
    RankingReport r = rank(p, load_tree_file(testing::data_path("sswl7/trees.nwk")), kAll, true);
    const char* l1[6] = {"8811/157216", "7103/157216", "5439/157216", "5739/157216", "25/578", "11795/314432"};
    for (int i = 0; i < 6; ++i) {
        std::string id = "T" + std::to_string(i + 1);
        c.exact(candidate(r, id).l1, l1[i], id + " l1");
        c.exact(candidate(r, id).linf, i < 5 ? "13/4913" : "207/78608", id + " linf");
    }
    const std::string& wi = r.winners.at(Criterion::Linf).id;
    const std::string& w1 = r.winners.at(Criterion::L1).id;
    c.expect(wi == "T6", "linf winner " + wi + " != T6");
    c.expect(w1 == "T3", "l1 winner " + w1 + " != T3");
    c.expect(r.agreement == "inconsistent", "agreement '" + r.agreement + "' does not flag the linf/l1 disagreement");
}

// 5: printed flattening matrices through the distance and invariants commands.
void matrices(Check& c) {
    struct Set {
        std::string dir;
        bool snap;
        std::vector<std::string> trees, edges;
        std::vector<std::vector<double>> dist_sq; // per tree, per edge
        std::vector<double> l1;
        std::string winner;
    };
    const Set sets[2] = {
        {"romance", true, {"T1", "T2"}, {"e1", "e2", "e3"},
         {{0.28546e-3, 0.35251e-3, 0.23506e-3}, {0.13904e-3, 0.33899e-3, 0.28546e-3}}, {0.24790e-1, 0.22681e-1}, "T2"},
        {"slavic", false, {"T1", "T2", "T3", "T4", "T5"}, {"e1", "e2"},
         {{0.4094e-5, 0.1470e-3}, {0.4094e-5, 0.1527e-3}, {0.4094e-5, 0.5718e-5}, {0.9803e-5, 0.5718e-5}, {0.1374e-4, 0.5718e-5}},
         {0.31794e-2, 0.36582e-2, 0.90864e-3, 0.13621e-2, 0.17175e-2}, "T3"},
    };
    for (const Set& s : sets) {
        std::vector<std::string> snap = {"--snap", s.snap ? "auto" : "none", "--format", "tsv"};
        for (std::size_t t = 0; t < s.trees.size(); ++t) {
            std::vector<std::string> args = {"distance"};
            for (const auto& e : s.edges) args.insert(args.end(), {"--matrix", testing::data_path(s.dir + "/" + s.trees[t] + "_" + e + ".tsv")});
            args.insert(args.end(), snap.begin(), snap.end());
            auto rows = tsv_rows(run_cli(args));
            for (std::size_t e = 0; e < s.edges.size(); ++e)
                c.near(std::stod(rows.at(e).at(2)), s.dist_sq[t][e], 2e-6, s.dir + " " + s.trees[t] + " " + s.edges[e] + " dist_sq");

            args[0] = "invariants";
            rows = tsv_rows(run_cli(args));
            c.near(parse_rational(rows.back().at(2)).get_d(), s.l1[t], 1e-5, s.dir + " " + s.trees[t] + " l1");
        }
        std::vector<std::string> args = {"analyze", "--matrix", testing::data_path(s.dir + "/manifest.tsv"), "--snap", s.snap ? "auto" : "none"};
        nlohmann::json j = nlohmann::json::parse(run_cli(args));
        for (const char* k : {"l1", "dist"})
            c.expect(j["winners"][k] == s.winner, s.dir + " " + k + " winner " + j["winners"][k].get<std::string>() + " != " + s.winner);
    }
}

// 6: early Indo-European table end to end.
void early_ie(Check& c) {
    struct Case {
        std::string order_file;
        std::vector<std::pair<const char*, const char*>> p;
    };
    const Case cases[2] = {
        {"early_ie/languages_a.txt",
         {{"00000", "4/11"}, {"11111", "3/11"}, {"11101", "2/11"}, {"11011", "1/22"}, {"10111", "1/11"}, {"01000", "1/22"}}},
        {"early_ie/languages_b.txt",
         {{"00000", "4/11"}, {"11111", "3/11"}, {"11011", "2/11"}, {"10111", "1/22"}, {"11101", "1/11"}, {"00010", "1/22"}}},
    };
    BoundaryDistribution first;
    for (const Case& k : cases) {
        std::size_t n_vars = 0;
        BoundaryDistribution p = from_table("early_ie/table.tsv", Dialect::Sswl, load_leaf_order(testing::data_path(k.order_file)), &n_vars);
        if (first.leaves.empty()) first = p;
        c.expect(n_vars == 22, k.order_file + ": " + std::to_string(n_vars) + " variables != 22");
        c.expect(p.p.size() == k.p.size(), k.order_file + ": support size " + std::to_string(p.p.size()));
        for (const auto& [pat, v] : k.p) c.exact(p.at(parse_pattern(pat)), v, k.order_file + " p" + pat);
    }

    auto trees = load_tree_file(testing::data_path("early_ie/trees.nwk"));
    RankingReport r = rank(first, trees, kAll, false);
    c.exact(candidate(r, "GA").linf, "8/1331", "GA linf");
    c.exact(candidate(r, "RWT").linf, "8/1331", "RWT linf");
    c.exact(candidate(r, "GA").l1, "61/2662", "GA l1");
    c.exact(candidate(r, "RWT").l1, "18/1331", "RWT l1");

    const std::map<std::string, std::vector<std::vector<double>>> sigma = {
        {"GA", {{0.3664662612, 0.3394847389, 0.05018672314, 0}, {0.3664662612, 0.3388120907, 0.05454321492, 0}}},
        {"RWT", {{0.3664662613, 0.3421098124, 0.02700872640, 0}, {0.3664662613, 0.3394847388, 0.05018672301, 0}}},
    };
    for (const auto& t : trees) {
        PhyloTree aligned = t.tree.with_leaf_order(first.leaves);
        std::vector<std::vector<double>> got;
        for (const auto& s : internal_edge_splits(aligned)) got.push_back(spectral_summary(flatten(first, s).matrix).singular_values);
        for (const auto& want : sigma.at(t.id)) {
            bool matched = std::any_of(got.begin(), got.end(), [&](const std::vector<double>& g) {
                if (g.size() != want.size()) return false;
                for (std::size_t i = 0; i < g.size(); ++i)
                    if (std::fabs(g[i] - want[i]) > 1e-6) return false;
                return true;
            });
            std::ostringstream s;
            s.precision(10);
            s << t.id << " singular values " << want[0] << ',' << want[1] << ',' << want[2] << " not found";
            c.expect(matched, s.str());
        }
    }
    c.near(std::sqrt(*candidate(r, "GA").dist_sq_lb), 0.054543, 1e-6, "GA distance");
    c.near(std::sqrt(*candidate(r, "RWT").dist_sq_lb), 0.050186, 1e-6, "RWT distance");
    for (Criterion k : {Criterion::L1, Criterion::Dist})
        c.expect(r.winners.at(k).id == "RWT", std::string(criterion_name(k)) + " winner " + r.winners.at(k).id + " != RWT");
}

// 7: random Markov models against the sum over histories.
void markov_models(Check& c) {
    std::mt19937_64 rng(7);
    int five_leaf = 0;
    for (int i = 0; i < 200; ++i) {
        std::size_t n = 4 + static_cast<std::size_t>(i % 4);
        PhyloTree t = testing::random_binary_tree(n, rng);
        TreeMarkovModel m = testing::random_model(t, rng);
        BoundaryDistribution p = boundary_map(m);
        std::string tag = "model " + std::to_string(i) + " (" + write_newick(t) + ")";
        c.expect(p.total() == 1, tag + ": mass != 1");
        auto splits = internal_edge_splits(t);
        for (const auto& s : splits) c.expect(rational_rank(flatten(p, s).matrix) <= 2, tag + ": flattening rank > 2");
        InvariantScore score = tree_invariant_score(p, t, splits);
        c.expect(score.linf == 0 && score.l1 == 0, tag + ": nonzero invariant score");
        c.expect(tree_distance_estimate(p, t, splits).lower_bound < 1e-14, tag + ": distance >= 1e-14");
        if (n == 5) {
            ++five_leaf;
            c.expect(p.p == testing::naive_boundary_map(m).p, tag + ": differs from the sum over histories");
        }
    }
    c.expect(five_leaf >= 50, "too few 5-leaf models");
}

// 8: structural properties of trees and rankings.
void structure(Check& c) {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 500; ++i) {
        std::size_t n = std::uniform_int_distribution<std::size_t>(2, 24)(rng);
        std::size_t arity = std::uniform_int_distribution<std::size_t>(2, 5)(rng);
        PhyloTree t = parse_newick(testing::random_newick(n, rng, arity));
        std::string canon = write_newick(t);
        PhyloTree back = parse_newick(canon, t.leaf_names());
        c.expect(back == t && write_newick(back) == canon, "round trip failed for " + canon);
    }

    for (int n = 3; n <= 8; ++n) {
        std::vector<LeafLabel> labels;
        for (int i = 0; i < n; ++i) labels.push_back({"x" + std::to_string(i), i});
        auto topos = enumerate_unrooted_binary(labels);
        std::set<UnrootedTopology> distinct(topos.begin(), topos.end());
        c.expect(topos.size() == testing::double_factorial(2 * n - 5) && distinct.size() == topos.size(),
                 "enumerate(" + std::to_string(n) + ") gave " + std::to_string(topos.size()));
    }

    auto fig = load_tree_file(testing::data_path("longobardi/figure1.nwk"));
    const auto& order = fig.at(0).tree.leaf_names();
    std::set<UnrootedTopology> moved, listed;
    for (const auto& t : ancient_pair_resolutions(fig[0].tree, "Gothic", "Old_English")) moved.insert(unrooted_topology(t.with_leaf_order(order)));
    for (const auto& t : load_tree_file(testing::data_path("longobardi/trees.nwk"))) listed.insert(unrooted_topology(t.tree.with_leaf_order(order)));
    c.expect(moved == listed && moved.size() == 6, "ancient move does not give the six listed trees");

    for (int i = 0; i < 50; ++i) {
        std::size_t n = std::uniform_int_distribution<std::size_t>(3, 9)(rng);
        std::size_t m = std::uniform_int_distribution<std::size_t>(3, 9)(rng);
        PhyloTree t1 = testing::random_tree_with_leaf(n, rng, "a");
        PhyloTree t2 = testing::random_tree_with_leaf(m, rng, "b");
        PhyloTree g = graft(t1, t2, "x");
        c.expect(g.num_leaves() == n + m - 2, "graft leaf count");
        testing::NameSet l1(t1.leaf_names().begin(), t1.leaf_names().end()), l2(t2.leaf_names().begin(), t2.leaf_names().end());
        l1.erase("x");
        l2.erase("x");
        std::set<testing::NameSplit> expected;
        for (const auto& sp : testing::all_name_splits(t1)) expected.insert(testing::substitute(sp, "x", l2));
        for (const auto& sp : testing::all_name_splits(t2)) expected.insert(testing::substitute(sp, "x", l1));
        c.expect(testing::nontrivial(testing::all_name_splits(g)) == testing::nontrivial(expected),
                 "graft split law fails for " + write_newick(t1) + " and " + write_newick(t2));
    }

    struct Ranked {
        BoundaryDistribution p;
        std::vector<NamedTree> trees;
    };
    std::vector<Ranked> rankings = {
        {from_table("s1/table.tsv", Dialect::Sswl, load_leaf_order(testing::data_path("s1/languages.txt"))),
         load_tree_file(testing::data_path("s1/trees.nwk"))},
        {load_distribution(testing::data_path("sswl7/distribution.tsv")), load_tree_file(testing::data_path("sswl7/trees.nwk"))},
    };
    for (const auto& [p, trees] : rankings) {
        RankingReport base = rank(p, trees, kAll, true);
        for (const char* factor : {"3/7", "5/2", "1/1000"}) {
            BoundaryDistribution s = p;
            for (auto& [pat, v] : s.p) v *= parse_rational(factor);
            RankingReport r = rank(s, trees, kAll, true);
            for (Criterion k : kAll)
                c.expect(r.winners.at(k).id == base.winners.at(k).id,
                         std::string(criterion_name(k)) + " winner changes under rescaling by " + factor);
        }
    }
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
        {"germanic conditional invariants are exact", germanic_invariants},
        {"germanic distances within 1e-7 and pars2 wins", germanic_distances},
        {"longobardi parameters end to end", longobardi},
        {"SSWL probability table scores and winner disagreement", sswl},
        {"romance and slavic matrices through distance and invariants", matrices},
        {"early indo-european table end to end", early_ie},
        {"random Markov models lie on the tree variety", markov_models},
        {"structural tree and ranking properties", structure},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check c;
        try {
            criteria[i].second(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        const auto& f = c.failures();
        std::cout << (f.empty() ? "PASS" : "FAIL") << ' ' << (i + 1) << ' ' << criteria[i].first;
        for (std::size_t k = 0; k < f.size(); ++k) std::cout << (k ? "; " : ": ") << f[k];
        std::cout << '\n';
        if (!f.empty()) ++failed;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << " of " << criteria.size() << " criteria pass\n";
    return failed == 0 ? 0 : 1;
}

#pragma once

// Shared helpers for the test suites: random trees and models, and the
// direct sum-over-histories oracle for the boundary map.

#include "phyloalg/dataset.hpp"
#include "phyloalg/markov.hpp"
#include "phyloalg/tree.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <set>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

using namespace phyloalg;

inline std::string data_path(const std::string& rel) {
    return std::string(PHYLOALG_DATA_DIR) + "/" + rel;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<std::string> leaf_names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("t" + std::to_string(i));
    return out;
}

// Random Newick text built by repeatedly joining random clusters.  With
// max_arity > 2 some joins take up to max_arity clusters.
inline std::string random_newick(std::size_t n, std::mt19937_64& rng, std::size_t max_arity = 2) {
    std::vector<std::string> parts = leaf_names(n);
    std::shuffle(parts.begin(), parts.end(), rng);
    while (parts.size() > 1) {
        std::size_t k = 2;
        if (max_arity > 2) k = std::uniform_int_distribution<std::size_t>(2, std::min(max_arity, parts.size()))(rng);
        std::shuffle(parts.begin(), parts.end(), rng);
        std::string joined = "(";
        for (std::size_t i = 0; i < k; ++i) joined += (i ? "," : "") + parts[parts.size() - 1 - i];
        joined += ")";
        parts.resize(parts.size() - k);
        parts.push_back(joined);
    }
    return parts.front();
}

inline PhyloTree random_binary_tree(std::size_t n, std::mt19937_64& rng) {
    return parse_newick(random_newick(n, rng), leaf_names(n));
}

// Rational in [0, 1] with a small random denominator.
inline Rational random_unit_rational(std::mt19937_64& rng, int max_den = 13) {
    int den = std::uniform_int_distribution<int>(1, max_den)(rng);
    int num = std::uniform_int_distribution<int>(0, den)(rng);
    Rational r(num, den);
    r.canonicalize();
    return r;
}

inline TreeMarkovModel random_model(const PhyloTree& t, std::mt19937_64& rng) {
    TreeMarkovModel m;
    m.tree = t;
    m.pi = random_unit_rational(rng);
    m.edge_flip.assign(t.num_nodes(), Rational(0));
    for (std::size_t v = 0; v < t.num_nodes(); ++v)
        if (static_cast<int>(v) != t.root()) m.edge_flip[v] = random_unit_rational(rng);
    return m;
}

// Direct sum over every assignment of states to the internal vertices.
inline BoundaryDistribution naive_boundary_map(const TreeMarkovModel& m) {
    const PhyloTree& t = m.tree;
    std::size_t n = t.num_leaves();
    std::vector<int> internal;
    for (std::size_t v = 0; v < t.num_nodes(); ++v)
        if (!t.is_leaf(static_cast<int>(v))) internal.push_back(static_cast<int>(v));
    BoundaryDistribution d;
    d.leaves = t.leaf_names();
    std::vector<int> state(t.num_nodes());
    for (Pattern pat = 0; pat < (Pattern{1} << n); ++pat) {
        Rational total = 0;
        for (std::uint64_t h = 0; h < (std::uint64_t{1} << internal.size()); ++h) {
            for (std::size_t i = 0; i < internal.size(); ++i) state[static_cast<std::size_t>(internal[i])] = (h >> i) & 1;
            for (std::size_t l = 0; l < n; ++l)
                state[static_cast<std::size_t>(t.leaf_node(static_cast<int>(l)))] = (pat >> (n - 1 - l)) & 1;
            Rational term = state[static_cast<std::size_t>(t.root())] == 0 ? m.pi : Rational(1 - m.pi);
            for (std::size_t v = 0; v < t.num_nodes() && term != 0; ++v) {
                int par = t.node(static_cast<int>(v)).parent;
                if (par < 0) continue;
                const Rational& p = m.edge_flip[v];
                term *= state[v] == state[static_cast<std::size_t>(par)] ? Rational(1 - p) : p;
            }
            total += term;
        }
        if (total != 0) d.p[pat] = total;
    }
    return d;
}

// Splits as pairs of leaf-name sets, for comparing trees over different leaf
// indexings.
using NameSet = std::set<std::string>;
using NameSplit = std::set<NameSet>; // both sides, so orientation does not matter

inline NameSet side_names(const std::vector<int>& side, const std::vector<std::string>& names) {
    NameSet s;
    for (int i : side) s.insert(names[static_cast<std::size_t>(i)]);
    return s;
}

// Every split of the tree, trivial ones included, as pairs of name sets.
inline std::set<NameSplit> all_name_splits(const PhyloTree& t) {
    std::set<NameSplit> out;
    const auto& names = t.leaf_names();
    for (const auto& s : unrooted_topology(t).canonical_splits)
        out.insert({side_names(s.side_a, names), side_names(s.side_b, names)});
    NameSet all(names.begin(), names.end());
    for (const auto& n : names) {
        NameSet rest = all;
        rest.erase(n);
        out.insert({NameSet{n}, rest});
    }
    return out;
}

inline std::set<NameSplit> nontrivial(const std::set<NameSplit>& s) {
    std::set<NameSplit> out;
    for (const auto& sp : s)
        if (std::all_of(sp.begin(), sp.end(), [](const NameSet& x) { return x.size() >= 2; })) out.insert(sp);
    return out;
}

inline NameSplit substitute(const NameSplit& sp, const std::string& leaf, const NameSet& replacement) {
    NameSplit out;
    for (NameSet side : sp) {
        if (side.erase(leaf)) side.insert(replacement.begin(), replacement.end());
        out.insert(side);
    }
    return out;
}

inline std::string renamed_newick(std::size_t n, std::mt19937_64& rng, const std::string& prefix) {
    std::string text = random_newick(n, rng);
    std::string out;
    for (char c : text) out += c == 't' ? prefix : std::string(1, c);
    return out;
}

inline std::uint64_t double_factorial(int k) {
    std::uint64_t r = 1;
    for (int i = k; i > 1; i -= 2) r *= static_cast<std::uint64_t>(i);
    return r;
}

// A random tree on n leaves named prefix0.. whose last leaf is renamed to x.
inline PhyloTree random_tree_with_leaf(std::size_t n, std::mt19937_64& rng, const std::string& prefix) {
    std::string s = renamed_newick(n, rng, prefix);
    std::string from = prefix + std::to_string(n - 1);
    auto pos = s.find(from);
    while (pos != std::string::npos) {
        std::size_t end = pos + from.size();
        if (end >= s.size() || !std::isdigit(static_cast<unsigned char>(s[end]))) {
            s.replace(pos, from.size(), "x");
            break;
        }
        pos = s.find(from, pos + 1);
    }
    return parse_newick(s);
}

} // namespace testing

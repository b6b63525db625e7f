#pragma once

#include "phyloalg/dataset.hpp"
#include "phyloalg/rational.hpp"
#include "phyloalg/tree.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace phyloalg {

// Binary Markov model: the root is in state 0 with probability pi, and the
// edge above node v flips the state with probability edge_flip[v], i.e. has
// transition matrix [[1-p, p], [p, 1-p]].  State 0 = feature absent.
struct TreeMarkovModel {
    PhyloTree tree;
    Rational pi = Rational(1, 2);
    std::vector<Rational> edge_flip; // indexed by node id; root entry unused
};

// Throws ValidationError unless pi and every flip lie in [0, 1] and there is
// one parameter per node.
void validate_model(const TreeMarkovModel& m);

// Exact distribution of leaf patterns, by dynamic programming over the tree.
BoundaryDistribution boundary_map(const TreeMarkovModel& m);

// Flip parameter of the product of two symmetric transition matrices.
Rational compose_flips(const Rational& a, const Rational& b);

// Requires shared_leaf to be a child of m2's root.  The result keeps m1's
// root distribution; the glued edge gets the composed flip.
TreeMarkovModel graft_models(const TreeMarkovModel& m1, const TreeMarkovModel& m2, const std::string& shared_leaf);

// Counter-based generator (Steele, Lea, Flood 2014).
class SplitMix64 {
public:
    using result_type = std::uint64_t;
    static constexpr const char* algorithm = "splitmix64";

    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()();

private:
    std::uint64_t state_;
};

// N independent leaf patterns drawn from boundary_map(m).
PatternCounts sample_patterns(const TreeMarkovModel& m, std::uint64_t count, SplitMix64& rng);
PatternCounts sample_patterns(const TreeMarkovModel& m, std::uint64_t count, std::uint64_t seed);

// Edge key used in model files: the leaf name for a leaf, otherwise the
// names below the node in leaf-index order joined by ','.
std::string edge_key(const PhyloTree& t, int node);

// {"tree": "<newick>", "pi": "1/3", "edges": {"<edge key>": "1/5", ..., "default": "0"}}
// Values may be JSON strings ("p/q" or decimal) or numbers.
TreeMarkovModel parse_model_json(const std::string& text);
TreeMarkovModel load_model(const std::string& path);
std::string model_to_json(const TreeMarkovModel& m);

} // namespace phyloalg

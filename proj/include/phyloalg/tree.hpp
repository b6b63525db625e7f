#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace phyloalg {

// Leaf sets are bitmasks over leaf indices, so trees hold at most 64 leaves.
using LeafMask = std::uint64_t;
inline constexpr std::size_t kMaxLeaves = 64;

struct LeafLabel {
    std::string name;
    int index = 0;
};

struct Node {
    int parent = -1;
    std::vector<int> children;
    int leaf = -1; // leaf index, -1 for internal nodes
};

// Rooted leaf-labelled tree, possibly multifurcating.  Immutable once built.
class PhyloTree {
public:
    PhyloTree() = default;

    // Validates and takes ownership.  leaf_names[i] is the name of leaf index i.
    static PhyloTree from_nodes(std::vector<Node> nodes, int root, std::vector<std::string> leaf_names);

    std::size_t num_nodes() const { return nodes_.size(); }
    std::size_t num_leaves() const { return names_.size(); }
    int root() const { return root_; }
    const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    bool is_leaf(int id) const { return node(id).leaf >= 0; }

    const std::vector<std::string>& leaf_names() const { return names_; }
    std::vector<LeafLabel> leaves() const;
    int leaf_node(int leaf_index) const { return leaf_nodes_.at(static_cast<std::size_t>(leaf_index)); }
    std::optional<int> find_leaf(std::string_view name) const;

    // Leaf indices below a node.
    LeafMask clade(int id) const { return clades_.at(static_cast<std::size_t>(id)); }
    LeafMask all_leaves() const { return clade(root_); }

    // Binary as an unrooted tree: non-root internal nodes have 2 children,
    // the root has 2 or 3.
    bool is_binary() const;
    // Every internal node, root included, has exactly 2 children.
    bool is_rooted_binary() const;

    // Same tree with leaf indices reassigned to follow `order` (a permutation
    // of the leaf names).  Throws LeafMismatchError otherwise.
    PhyloTree with_leaf_order(const std::vector<std::string>& order) const;

    // Equal leaf indexing and equal rooted shape (child order ignored).
    friend bool operator==(const PhyloTree& a, const PhyloTree& b);

private:
    std::vector<Node> nodes_;
    int root_ = -1;
    std::vector<std::string> names_;
    std::vector<int> leaf_nodes_;
    std::vector<LeafMask> clades_;
};

// Bipartition of the leaf set induced by an edge.
struct EdgeSplit {
    std::vector<int> side_a;
    std::vector<int> side_b;

    static EdgeSplit from_mask(LeafMask side_a, std::size_t n);
    LeafMask mask_a() const;
    LeafMask mask_b() const;
    std::size_t num_leaves() const { return side_a.size() + side_b.size(); }
    // Oriented so that side_a contains leaf 0.
    EdgeSplit normalized() const;
    bool same_bipartition(const EdgeSplit& other) const;

    auto operator<=>(const EdgeSplit&) const = default;
};

// "A,B|C,D,E" using leaf names.
std::string format_split(const EdgeSplit& s, const std::vector<std::string>& names);
// Parses "A,B|C,D,E"; side_b may be omitted ("A,B") and is then the complement.
EdgeSplit parse_split(std::string_view text, const std::vector<std::string>& names);

struct UnrootedTopology {
    std::size_t n = 0;
    std::vector<EdgeSplit> canonical_splits; // normalized, sorted

    auto operator<=>(const UnrootedTopology&) const = default;
};

// All nontrivial splits of any tree (binary or not), normalized and sorted.
UnrootedTopology unrooted_topology(const PhyloTree& tree);

// Builds the tree rooted at the node adjacent to leaf 0 from a compatible
// split set.
PhyloTree tree_from_topology(const UnrootedTopology& topo, const std::vector<std::string>& leaf_names);

PhyloTree parse_newick(std::string_view text);
// Leaf indices follow `leaf_order`, which must name exactly the tree's leaves.
PhyloTree parse_newick(std::string_view text, const std::vector<std::string>& leaf_order);

// Canonical form: children ordered by smallest contained leaf index, no
// trailing semicolon.
std::string write_newick(const PhyloTree& tree);

// One split per internal edge of the underlying unrooted tree, normalized
// and sorted.  Requires is_binary() and n >= 4.
std::vector<EdgeSplit> internal_edge_splits(const PhyloTree& tree);

// Every rooted binary refinement of the tree.  The first element is the
// canonical comb refinement (see binarize).
std::vector<PhyloTree> rooted_resolutions(const PhyloTree& tree);

// Refines each multifurcation c1..ck (canonical order) into (c1,(c2,(...,ck))).
PhyloTree binarize(const PhyloTree& tree);

// rooted_resolutions deduplicated by unrooted topology, first representative
// kept.
std::vector<PhyloTree> resolve_multifurcations(const PhyloTree& tree);

// All (2n-5)!! unrooted binary topologies on the given leaves, 3 <= n <= 8.
std::vector<UnrootedTopology> enumerate_unrooted_binary(const std::vector<LeafLabel>& leaves);

struct GraftResult {
    PhyloTree tree;
    // For each node of `tree`, the edges (tree 1 or 2, node id of the child
    // end) composed into the edge above it.  Empty for the root.
    std::vector<std::vector<std::pair<int, int>>> edge_sources;
};

// Glues the edge of t1 ending at shared_leaf to the edge of t2 ending at
// shared_leaf.  t2 is re-rooted at the leaf's neighbour; unary nodes are
// suppressed.
GraftResult graft_detailed(const PhyloTree& t1, const PhyloTree& t2, std::string_view shared_leaf);
PhyloTree graft(const PhyloTree& t1, const PhyloTree& t2, std::string_view shared_leaf);

std::vector<PhyloTree> ancient_pair_resolutions(const PhyloTree& tree, std::string_view a1, std::string_view a2);

struct NamedTree {
    std::string id;
    PhyloTree tree;
};

// One tree per line, '#' comments, optional "label<TAB>" prefix.
std::vector<NamedTree> parse_tree_list(std::istream& in, const std::vector<std::string>* leaf_order = nullptr);
std::vector<NamedTree> load_tree_file(const std::string& path, const std::vector<std::string>* leaf_order = nullptr);

// One name per line; blank lines and '#' comments ignored.
std::vector<std::string> load_leaf_order(const std::string& path);

} // namespace phyloalg

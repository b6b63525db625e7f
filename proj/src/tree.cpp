#include "phyloalg/tree.hpp"

#include "phyloalg/error.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace phyloalg {

namespace {

int lowest_leaf(LeafMask m) {
    return m == 0 ? static_cast<int>(kMaxLeaves) : std::countr_zero(m);
}

// Value-type tree used while constructing new topologies.
struct Clade {
    int leaf = -1;
    std::vector<Clade> children;
};

LeafMask clade_mask(const Clade& c) {
    if (c.leaf >= 0) return LeafMask{1} << c.leaf;
    LeafMask m = 0;
    for (const auto& ch : c.children) m |= clade_mask(ch);
    return m;
}

Clade make_leaf(int leaf) {
    Clade c;
    c.leaf = leaf;
    return c;
}

Clade make_pair(Clade a, Clade b) {
    Clade c;
    c.children.push_back(std::move(a));
    c.children.push_back(std::move(b));
    return c;
}

Clade to_clade(const PhyloTree& t, int id) {
    const Node& n = t.node(id);
    if (n.leaf >= 0) return make_leaf(n.leaf);
    Clade c;
    for (int ch : n.children) c.children.push_back(to_clade(t, ch));
    return c;
}

// Children of a node in canonical order (smallest contained leaf first).
std::vector<int> sorted_children(const PhyloTree& t, int id) {
    std::vector<int> ch = t.node(id).children;
    std::sort(ch.begin(), ch.end(),
              [&](int a, int b) { return lowest_leaf(t.clade(a)) < lowest_leaf(t.clade(b)); });
    return ch;
}

int add_clade(const Clade& c, int parent, std::vector<Node>& nodes) {
    int id = static_cast<int>(nodes.size());
    nodes.push_back(Node{});
    nodes[static_cast<std::size_t>(id)].parent = parent;
    nodes[static_cast<std::size_t>(id)].leaf = c.leaf;
    for (const auto& ch : c.children) {
        int cid = add_clade(ch, id, nodes);
        nodes[static_cast<std::size_t>(id)].children.push_back(cid);
    }
    return id;
}

PhyloTree from_clade(const Clade& c, std::vector<std::string> names) {
    std::vector<Node> nodes;
    int root = add_clade(c, -1, nodes);
    return PhyloTree::from_nodes(std::move(nodes), root, std::move(names));
}

bool valid_leaf_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

class NewickParser {
public:
    explicit NewickParser(std::string_view text) : s_(text) {}

    PhyloTree parse() {
        skip_ws();
        if (pos_ >= s_.size()) throw ParseError("empty Newick input");
        int root = parse_subtree(-1);
        skip_ws();
        if (peek() == ';') {
            ++pos_;
            skip_ws();
        }
        if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
        return PhyloTree::from_nodes(std::move(nodes_), root, std::move(names_));
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
    std::vector<Node> nodes_;
    std::vector<std::string> names_;
    std::unordered_set<std::string> seen_;

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("Newick syntax error at byte " + std::to_string(pos_) + ": " + what);
    }

    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    std::string read_label() {
        std::size_t start = pos_;
        while (pos_ < s_.size() && valid_leaf_char(s_[pos_])) ++pos_;
        return std::string(s_.substr(start, pos_ - start));
    }

    // Branch lengths are accepted and discarded.
    void skip_length() {
        skip_ws();
        if (peek() != ':') return;
        ++pos_;
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' || s_[pos_] == 'e' ||
                s_[pos_] == 'E' || s_[pos_] == '-' || s_[pos_] == '+'))
            ++pos_;
        if (start == pos_) fail("expected branch length after ':'");
    }

    int new_node(int parent) {
        nodes_.push_back(Node{});
        nodes_.back().parent = parent;
        return static_cast<int>(nodes_.size()) - 1;
    }

    int parse_subtree(int parent) {
        skip_ws();
        if (peek() == '(') {
            std::size_t open = pos_;
            ++pos_;
            int id = new_node(parent);
            while (true) {
                int child = parse_subtree(id);
                nodes_[static_cast<std::size_t>(id)].children.push_back(child);
                skip_ws();
                if (peek() == ',') {
                    ++pos_;
                    continue;
                }
                if (peek() == ')') {
                    ++pos_;
                    break;
                }
                fail("expected ',' or ')'");
            }
            if (nodes_[static_cast<std::size_t>(id)].children.size() < 2) {
                pos_ = open;
                fail("internal node with a single child");
            }
            skip_ws();
            read_label(); // internal labels are ignored
            skip_length();
            return id;
        }
        std::size_t start = pos_;
        std::string name = read_label();
        if (name.empty()) fail("expected leaf name or '('");
        if (!seen_.insert(name).second) {
            pos_ = start;
            fail("duplicate leaf name '" + name + "'");
        }
        int id = new_node(parent);
        nodes_[static_cast<std::size_t>(id)].leaf = static_cast<int>(names_.size());
        names_.push_back(name);
        skip_length();
        return id;
    }
};

void write_node(const PhyloTree& t, int id, std::string& out) {
    const Node& n = t.node(id);
    if (n.leaf >= 0) {
        out += t.leaf_names()[static_cast<std::size_t>(n.leaf)];
        return;
    }
    out += '(';
    bool first = true;
    for (int ch : sorted_children(t, id)) {
        if (!first) out += ',';
        first = false;
        write_node(t, ch, out);
    }
    out += ')';
}

// All rooted binary trees whose leaves are the given items, with items[0]
// always in the left subtree of the root.  The comb (i0,(i1,(...))) is first.
std::vector<Clade> binary_shapes(const std::vector<int>& items) {
    if (items.size() == 1) return {make_leaf(items[0])};
    std::vector<Clade> out;
    std::vector<int> rest(items.begin() + 1, items.end());
    std::size_t r = rest.size();
    for (LeafMask mask = 0; mask + 1 < (LeafMask{1} << r); ++mask) {
        std::vector<int> left{items[0]}, right;
        for (std::size_t i = 0; i < r; ++i) ((mask >> i) & 1 ? left : right).push_back(rest[i]);
        auto ls = binary_shapes(left);
        auto rs = binary_shapes(right);
        for (const auto& l : ls)
            for (const auto& rr : rs) out.push_back(make_pair(l, rr));
    }
    return out;
}

Clade substitute(const Clade& shape, const std::vector<const Clade*>& parts) {
    if (shape.leaf >= 0) return *parts[static_cast<std::size_t>(shape.leaf)];
    Clade c;
    for (const auto& ch : shape.children) c.children.push_back(substitute(ch, parts));
    return c;
}

std::vector<Clade> clade_resolutions(const PhyloTree& t, int id) {
    const Node& n = t.node(id);
    if (n.leaf >= 0) return {make_leaf(n.leaf)};
    std::vector<int> ch = sorted_children(t, id);
    std::vector<std::vector<Clade>> options;
    for (int c : ch) options.push_back(clade_resolutions(t, c));
    std::vector<int> items(ch.size());
    for (std::size_t i = 0; i < items.size(); ++i) items[i] = static_cast<int>(i);
    std::vector<Clade> out;
    for (const auto& shape : binary_shapes(items)) {
        std::vector<std::size_t> idx(options.size(), 0);
        while (true) {
            std::vector<const Clade*> parts;
            for (std::size_t i = 0; i < options.size(); ++i) parts.push_back(&options[i][idx[i]]);
            out.push_back(substitute(shape, parts));
            std::size_t k = 0;
            while (k < idx.size() && ++idx[k] == options[k].size()) idx[k++] = 0;
            if (k == idx.size()) break;
        }
    }
    return out;
}

Clade comb_clade(const PhyloTree& t, int id) {
    const Node& n = t.node(id);
    if (n.leaf >= 0) return make_leaf(n.leaf);
    std::vector<int> ch = sorted_children(t, id);
    Clade acc = comb_clade(t, ch.back());
    for (std::size_t i = ch.size() - 1; i-- > 0;) acc = make_pair(comb_clade(t, ch[i]), std::move(acc));
    return acc;
}

double resolution_count(const PhyloTree& t) {
    double total = 1;
    for (std::size_t id = 0; id < t.num_nodes(); ++id) {
        std::size_t k = t.node(static_cast<int>(id)).children.size();
        for (std::size_t j = 3; k >= 3 && j <= 2 * k - 3; j += 2) total *= static_cast<double>(j);
    }
    return total;
}

bool insert_leaf(Clade& c, int& counter, int target, int leaf, bool is_root) {
    if (!is_root) {
        if (counter == target) {
            Clade old = std::move(c);
            c = make_pair(std::move(old), make_leaf(leaf));
            return true;
        }
        ++counter;
    }
    for (auto& ch : c.children)
        if (insert_leaf(ch, counter, target, leaf, false)) return true;
    return false;
}

int count_edges(const Clade& c) {
    int e = 0;
    for (const auto& ch : c.children) e += 1 + count_edges(ch);
    return e;
}

void check_leaf_count(std::size_t n) {
    if (n > kMaxLeaves) throw ValidationError("trees are limited to " + std::to_string(kMaxLeaves) + " leaves");
}

} // namespace

// ============================================================================
// PhyloTree
// ============================================================================

PhyloTree PhyloTree::from_nodes(std::vector<Node> nodes, int root, std::vector<std::string> leaf_names) {
    check_leaf_count(leaf_names.size());
    if (nodes.empty() || root < 0 || static_cast<std::size_t>(root) >= nodes.size())
        throw ValidationError("tree has no valid root");
    if (nodes[static_cast<std::size_t>(root)].parent != -1) throw ValidationError("root has a parent");
    std::unordered_set<std::string> names;
    for (const auto& n : leaf_names) {
        if (n.empty()) throw ValidationError("empty leaf name");
        if (!names.insert(n).second) throw ValidationError("duplicate leaf name '" + n + "'");
    }
    PhyloTree t;
    t.leaf_nodes_.assign(leaf_names.size(), -1);
    t.clades_.assign(nodes.size(), 0);
    std::vector<char> visited(nodes.size(), 0);
    std::vector<int> order;
    std::vector<int> stack{root};
    while (!stack.empty()) {
        int id = stack.back();
        stack.pop_back();
        auto uid = static_cast<std::size_t>(id);
        if (visited[uid]) throw ValidationError("tree contains a cycle");
        visited[uid] = 1;
        order.push_back(id);
        const Node& n = nodes[uid];
        if (n.leaf >= 0) {
            if (!n.children.empty()) throw ValidationError("leaf node with children");
            if (static_cast<std::size_t>(n.leaf) >= leaf_names.size() ||
                t.leaf_nodes_[static_cast<std::size_t>(n.leaf)] != -1)
                throw ValidationError("invalid leaf index");
            t.leaf_nodes_[static_cast<std::size_t>(n.leaf)] = id;
        } else if (n.children.size() < 2) {
            throw ValidationError("internal node with fewer than two children");
        }
        for (int ch : n.children) {
            if (ch < 0 || static_cast<std::size_t>(ch) >= nodes.size() ||
                nodes[static_cast<std::size_t>(ch)].parent != id)
                throw ValidationError("inconsistent parent/child links");
            stack.push_back(ch);
        }
    }
    if (order.size() != nodes.size()) throw ValidationError("tree is not connected");
    for (int li : t.leaf_nodes_)
        if (li < 0) throw ValidationError("leaf label without a node");
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        auto uid = static_cast<std::size_t>(*it);
        const Node& n = nodes[uid];
        if (n.leaf >= 0)
            t.clades_[uid] = LeafMask{1} << n.leaf;
        else
            for (int ch : n.children) t.clades_[uid] |= t.clades_[static_cast<std::size_t>(ch)];
    }
    t.nodes_ = std::move(nodes);
    t.root_ = root;
    t.names_ = std::move(leaf_names);
    return t;
}

std::vector<LeafLabel> PhyloTree::leaves() const {
    std::vector<LeafLabel> out;
    for (std::size_t i = 0; i < names_.size(); ++i) out.push_back({names_[i], static_cast<int>(i)});
    return out;
}

std::optional<int> PhyloTree::find_leaf(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return static_cast<int>(i);
    return std::nullopt;
}

bool PhyloTree::is_binary() const {
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
        const Node& n = nodes_[id];
        if (n.leaf >= 0) continue;
        std::size_t k = n.children.size();
        if (static_cast<int>(id) == root_ ? (k != 2 && k != 3) : k != 2) return false;
    }
    return true;
}

bool PhyloTree::is_rooted_binary() const {
    for (const auto& n : nodes_)
        if (n.leaf < 0 && n.children.size() != 2) return false;
    return true;
}

PhyloTree PhyloTree::with_leaf_order(const std::vector<std::string>& order) const {
    if (order.size() != names_.size())
        throw LeafMismatchError("leaf order names " + std::to_string(order.size()) + " leaves, tree has " +
                                std::to_string(names_.size()));
    std::unordered_map<std::string, int> pos;
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
    std::vector<Node> nodes = nodes_;
    for (auto& n : nodes) {
        if (n.leaf < 0) continue;
        auto it = pos.find(names_[static_cast<std::size_t>(n.leaf)]);
        if (it == pos.end())
            throw LeafMismatchError("leaf '" + names_[static_cast<std::size_t>(n.leaf)] +
                                    "' is not in the leaf order");
        n.leaf = it->second;
    }
    return from_nodes(std::move(nodes), root_, order);
}

bool operator==(const PhyloTree& a, const PhyloTree& b) {
    return a.names_ == b.names_ && write_newick(a) == write_newick(b);
}

// ============================================================================
// Splits and topologies
// ============================================================================

EdgeSplit EdgeSplit::from_mask(LeafMask side_a, std::size_t n) {
    check_leaf_count(n);
    EdgeSplit s;
    for (std::size_t i = 0; i < n; ++i) ((side_a >> i) & 1 ? s.side_a : s.side_b).push_back(static_cast<int>(i));
    return s;
}

LeafMask EdgeSplit::mask_a() const {
    LeafMask m = 0;
    for (int i : side_a) m |= LeafMask{1} << i;
    return m;
}

LeafMask EdgeSplit::mask_b() const {
    LeafMask m = 0;
    for (int i : side_b) m |= LeafMask{1} << i;
    return m;
}

EdgeSplit EdgeSplit::normalized() const {
    if (!side_a.empty() && side_a.front() == 0) return *this;
    return EdgeSplit{side_b, side_a};
}

bool EdgeSplit::same_bipartition(const EdgeSplit& other) const {
    return normalized() == other.normalized();
}

std::string format_split(const EdgeSplit& s, const std::vector<std::string>& names) {
    std::string out;
    auto side = [&](const std::vector<int>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ',';
            out += names.at(static_cast<std::size_t>(v[i]));
        }
    };
    side(s.side_a);
    out += '|';
    side(s.side_b);
    return out;
}

EdgeSplit parse_split(std::string_view text, const std::vector<std::string>& names) {
    auto bar = text.find('|');
    std::string_view a = text.substr(0, bar);
    LeafMask mask = 0;
    std::stringstream ss{std::string(a)};
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto b = item.find_first_not_of(" \t");
        auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        item = item.substr(b, e - b + 1);
        auto it = std::find(names.begin(), names.end(), item);
        if (it == names.end()) throw LeafMismatchError("split names unknown leaf '" + item + "'");
        mask |= LeafMask{1} << (it - names.begin());
    }
    EdgeSplit s = EdgeSplit::from_mask(mask, names.size());
    if (bar != std::string_view::npos) {
        EdgeSplit rhs = parse_split(text.substr(bar + 1), names);
        if (rhs.mask_a() != s.mask_b()) throw LeafMismatchError("split sides do not partition the leaves");
    }
    if (s.side_a.empty() || s.side_b.empty()) throw ValidationError("split has an empty side");
    return s;
}

UnrootedTopology unrooted_topology(const PhyloTree& tree) {
    std::size_t n = tree.num_leaves();
    std::set<EdgeSplit> splits;
    for (std::size_t id = 0; id < tree.num_nodes(); ++id) {
        if (static_cast<int>(id) == tree.root()) continue;
        auto k = static_cast<std::size_t>(std::popcount(tree.clade(static_cast<int>(id))));
        if (k >= 2 && k + 2 <= n) splits.insert(EdgeSplit::from_mask(tree.clade(static_cast<int>(id)), n).normalized());
    }
    return UnrootedTopology{n, {splits.begin(), splits.end()}};
}

PhyloTree tree_from_topology(const UnrootedTopology& topo, const std::vector<std::string>& leaf_names) {
    std::size_t n = leaf_names.size();
    if (topo.n != n) throw LeafMismatchError("topology and leaf list differ in size");
    if (n == 0) throw ValidationError("empty leaf list");
    if (n == 1) return from_clade(make_leaf(0), leaf_names);
    std::vector<LeafMask> clusters;
    for (const auto& s : topo.canonical_splits) clusters.push_back(s.normalized().mask_b());
    for (std::size_t i = 1; i < n; ++i) clusters.push_back(LeafMask{1} << i);
    std::sort(clusters.begin(), clusters.end(), [](LeafMask a, LeafMask b) {
        return std::popcount(a) != std::popcount(b) ? std::popcount(a) > std::popcount(b) : a < b;
    });
    clusters.erase(std::unique(clusters.begin(), clusters.end()), clusters.end());
    std::function<std::vector<Clade>(LeafMask)> children_of = [&](LeafMask mask) {
        std::vector<Clade> out;
        LeafMask covered = 0;
        for (LeafMask c : clusters) {
            if (c == mask || (c & ~mask) != 0 || (c & covered) != 0) continue;
            covered |= c;
            if (std::popcount(c) == 1) {
                out.push_back(make_leaf(std::countr_zero(c)));
            } else {
                Clade cl;
                cl.children = children_of(c);
                out.push_back(std::move(cl));
            }
        }
        if (covered != mask) throw ValidationError("incompatible split set");
        return out;
    };
    if (n == 2) return from_clade(make_pair(make_leaf(0), make_leaf(1)), leaf_names);
    LeafMask all = n == kMaxLeaves ? ~LeafMask{0} : (LeafMask{1} << n) - 1;
    Clade root;
    root.children.push_back(make_leaf(0));
    for (auto& c : children_of(all & ~LeafMask{1})) root.children.push_back(std::move(c));
    return from_clade(root, leaf_names);
}

// ============================================================================
// Newick
// ============================================================================

PhyloTree parse_newick(std::string_view text) {
    return NewickParser(text).parse();
}

PhyloTree parse_newick(std::string_view text, const std::vector<std::string>& leaf_order) {
    return parse_newick(text).with_leaf_order(leaf_order);
}

std::string write_newick(const PhyloTree& tree) {
    std::string out;
    if (tree.num_nodes() > 0) write_node(tree, tree.root(), out);
    return out;
}

// ============================================================================
// Tree operations
// ============================================================================

std::vector<EdgeSplit> internal_edge_splits(const PhyloTree& tree) {
    if (tree.num_leaves() < 4) throw ValidationError("internal_edge_splits needs at least 4 leaves");
    if (!tree.is_binary()) throw ValidationError("tree is not binary: " + write_newick(tree));
    return unrooted_topology(tree).canonical_splits;
}

std::vector<PhyloTree> rooted_resolutions(const PhyloTree& tree) {
    if (resolution_count(tree) > 2.0e6) throw ValidationError("too many binary resolutions");
    std::vector<PhyloTree> out;
    for (const auto& c : clade_resolutions(tree, tree.root())) out.push_back(from_clade(c, tree.leaf_names()));
    return out;
}

PhyloTree binarize(const PhyloTree& tree) {
    return from_clade(comb_clade(tree, tree.root()), tree.leaf_names());
}

std::vector<PhyloTree> resolve_multifurcations(const PhyloTree& tree) {
    if (tree.is_rooted_binary()) return {tree};
    std::vector<PhyloTree> out;
    std::set<UnrootedTopology> seen;
    for (auto& t : rooted_resolutions(tree))
        if (seen.insert(unrooted_topology(t)).second) out.push_back(std::move(t));
    return out;
}

std::vector<UnrootedTopology> enumerate_unrooted_binary(const std::vector<LeafLabel>& leaves) {
    std::size_t n = leaves.size();
    if (n < 3 || n > 8) throw ValidationError("enumeration supports 3 to 8 leaves, got " + std::to_string(n));
    std::vector<char> seen(n, 0);
    for (const auto& l : leaves) {
        if (l.index < 0 || static_cast<std::size_t>(l.index) >= n || seen[static_cast<std::size_t>(l.index)])
            throw ValidationError("leaf indices must form 0..n-1");
        seen[static_cast<std::size_t>(l.index)] = 1;
    }
    Clade star;
    for (int i = 0; i < 3; ++i) star.children.push_back(make_leaf(i));
    std::vector<Clade> trees{star};
    for (int k = 3; k < static_cast<int>(n); ++k) {
        std::vector<Clade> next;
        for (const auto& t : trees) {
            int edges = count_edges(t);
            for (int e = 0; e < edges; ++e) {
                Clade c = t;
                int counter = 0;
                insert_leaf(c, counter, e, k, true);
                next.push_back(std::move(c));
            }
        }
        trees = std::move(next);
    }
    std::vector<std::string> names(n);
    for (const auto& l : leaves) names[static_cast<std::size_t>(l.index)] = l.name;
    std::vector<UnrootedTopology> out;
    out.reserve(trees.size());
    for (const auto& t : trees) out.push_back(unrooted_topology(from_clade(t, names)));
    return out;
}

namespace {

struct GNode {
    int leaf = -1;
    std::vector<GNode> children;
    std::vector<std::pair<int, int>> edge; // composed source edges above this node
};

// Walks t2 away from `from`, suppressing nodes left with a single child.
GNode reroot_walk(const PhyloTree& t, int at, int from, std::vector<std::pair<int, int>> edge,
                  const std::vector<int>& leaf_map) {
    std::vector<int> nbrs;
    const Node& n = t.node(at);
    if (n.parent >= 0 && n.parent != from) nbrs.push_back(n.parent);
    for (int ch : n.children)
        if (ch != from) nbrs.push_back(ch);
    auto edge_id = [&](int a, int b) { return t.node(b).parent == a ? b : a; };
    if (n.leaf >= 0) {
        GNode g;
        g.leaf = leaf_map[static_cast<std::size_t>(n.leaf)];
        g.edge = std::move(edge);
        return g;
    }
    if (nbrs.size() == 1) {
        edge.push_back({2, edge_id(at, nbrs[0])});
        return reroot_walk(t, nbrs[0], at, std::move(edge), leaf_map);
    }
    GNode g;
    g.edge = std::move(edge);
    for (int b : nbrs) g.children.push_back(reroot_walk(t, b, at, {{2, edge_id(at, b)}}, leaf_map));
    return g;
}

GNode copy_t1(const PhyloTree& t, int id, int shared_node, const std::vector<int>& leaf_map, GNode& replacement) {
    const Node& n = t.node(id);
    GNode g;
    if (id != t.root()) g.edge = {{1, id}};
    if (id == shared_node) {
        GNode r = std::move(replacement);
        r.edge.insert(r.edge.begin(), g.edge.begin(), g.edge.end());
        return r;
    }
    if (n.leaf >= 0) {
        g.leaf = leaf_map[static_cast<std::size_t>(n.leaf)];
        return g;
    }
    for (int ch : n.children) g.children.push_back(copy_t1(t, ch, shared_node, leaf_map, replacement));
    return g;
}

int add_gnode(const GNode& g, int parent, std::vector<Node>& nodes, std::vector<std::vector<std::pair<int, int>>>& src) {
    int id = static_cast<int>(nodes.size());
    nodes.push_back(Node{});
    src.push_back(g.edge);
    nodes.back().parent = parent;
    nodes.back().leaf = g.leaf;
    for (const auto& ch : g.children) {
        int cid = add_gnode(ch, id, nodes, src);
        nodes[static_cast<std::size_t>(id)].children.push_back(cid);
    }
    return id;
}

} // namespace

GraftResult graft_detailed(const PhyloTree& t1, const PhyloTree& t2, std::string_view shared_leaf) {
    auto l1 = t1.find_leaf(shared_leaf);
    auto l2 = t2.find_leaf(shared_leaf);
    if (!l1) throw ValidationError("shared leaf '" + std::string(shared_leaf) + "' missing from the first tree");
    if (!l2) throw ValidationError("shared leaf '" + std::string(shared_leaf) + "' missing from the second tree");
    if (t1.num_leaves() < 2 || t2.num_leaves() < 2) throw ValidationError("graft needs trees with at least 2 leaves");
    std::vector<std::string> names;
    std::vector<int> map1(t1.num_leaves(), -1), map2(t2.num_leaves(), -1);
    for (std::size_t i = 0; i < t1.num_leaves(); ++i) {
        if (static_cast<int>(i) == *l1) continue;
        map1[i] = static_cast<int>(names.size());
        names.push_back(t1.leaf_names()[i]);
    }
    std::unordered_set<std::string> taken(names.begin(), names.end());
    for (std::size_t i = 0; i < t2.num_leaves(); ++i) {
        if (static_cast<int>(i) == *l2) continue;
        if (taken.count(t2.leaf_names()[i]))
            throw ValidationError("leaf name collision: '" + t2.leaf_names()[i] + "'");
        map2[i] = static_cast<int>(names.size());
        names.push_back(t2.leaf_names()[i]);
    }
    check_leaf_count(names.size());
    int u2 = t2.leaf_node(*l2);
    GNode sub = reroot_walk(t2, t2.node(u2).parent, u2, {{2, u2}}, map2);
    GNode whole = copy_t1(t1, t1.root(), t1.leaf_node(*l1), map1, sub);
    GraftResult r;
    std::vector<Node> nodes;
    int root = add_gnode(whole, -1, nodes, r.edge_sources);
    r.tree = PhyloTree::from_nodes(std::move(nodes), root, std::move(names));
    return r;
}

PhyloTree graft(const PhyloTree& t1, const PhyloTree& t2, std::string_view shared_leaf) {
    return graft_detailed(t1, t2, shared_leaf).tree;
}

std::vector<PhyloTree> ancient_pair_resolutions(const PhyloTree& tree, std::string_view a1, std::string_view a2) {
    auto i1 = tree.find_leaf(a1);
    auto i2 = tree.find_leaf(a2);
    if (!i1 || !i2) throw ValidationError("ancient leaf not found in tree");
    if (*i1 == *i2) throw ValidationError("ancient pair must name two different leaves");
    int p1 = tree.node(tree.leaf_node(*i1)).parent;
    int p2 = tree.node(tree.leaf_node(*i2)).parent;
    bool cherry = p1 >= 0 && p1 == p2 &&
                  (tree.node(p1).children.size() == 2 || (p1 == tree.root() && tree.node(p1).children.size() == 3));
    if (!cherry)
        throw ValidationError("ancient pair " + std::string(a1) + "," + std::string(a2) + " is not a cherry");
    LeafMask pair = (LeafMask{1} << *i1) | (LeafMask{1} << *i2);
    std::vector<PhyloTree> out;
    std::set<UnrootedTopology> seen;
    bool any = false;
    auto emit = [&](Clade c) {
        PhyloTree t = from_clade(c, tree.leaf_names());
        if (seen.insert(unrooted_topology(t)).second) out.push_back(std::move(t));
    };
    for (const auto& res : rooted_resolutions(tree)) {
        const Node& r = res.node(res.root());
        int rest = -1;
        if (res.clade(r.children[0]) == pair) rest = r.children[1];
        if (res.clade(r.children[1]) == pair) rest = r.children[0];
        if (rest < 0) continue;
        any = true;
        Clade x = to_clade(res, rest);
        if (x.leaf >= 0) {
            emit(make_pair(make_pair(make_leaf(*i1), x), make_leaf(*i2)));
            emit(make_pair(make_pair(make_leaf(*i2), x), make_leaf(*i1)));
            continue;
        }
        std::vector<int> xs = sorted_children(res, rest);
        Clade x1 = to_clade(res, xs[0]);
        Clade x2 = to_clade(res, xs[1]);
        emit(make_pair(make_pair(make_leaf(*i1), x1), make_pair(make_leaf(*i2), x2)));
        emit(make_pair(make_pair(make_leaf(*i2), x1), make_pair(make_leaf(*i1), x2)));
    }
    if (!any) throw ValidationError("ancient cherry is not adjacent to the root");
    return out;
}

// ============================================================================
// Files
// ============================================================================

std::vector<NamedTree> parse_tree_list(std::istream& in, const std::vector<std::string>* leaf_order) {
    std::vector<NamedTree> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::string id, text = line;
        auto tab = line.find('\t');
        if (tab != std::string::npos) {
            id = line.substr(0, tab);
            text = line.substr(tab + 1);
            id.erase(0, id.find_first_not_of(" \t"));
            id.erase(id.find_last_not_of(" \t\r") + 1);
        }
        if (id.empty()) id = "T" + std::to_string(out.size() + 1);
        try {
            PhyloTree t = leaf_order ? parse_newick(text, *leaf_order) : parse_newick(text);
            out.push_back({id, std::move(t)});
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<NamedTree> load_tree_file(const std::string& path, const std::vector<std::string>* leaf_order) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open tree file '" + path + "'");
    try {
        return parse_tree_list(in, leaf_order);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::vector<std::string> load_leaf_order(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open leaf-order file '" + path + "'");
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        out.push_back(line.substr(b, e - b + 1));
    }
    return out;
}

} // namespace phyloalg

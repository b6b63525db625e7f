#include "phyloalg/markov.hpp"

#include "phyloalg/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <unordered_map>

namespace phyloalg {

namespace {

using Table = std::unordered_map<Pattern, Rational>;

// Below-node tables: tab[s] = distribution of the clade's leaf pattern given
// state s at the node.
std::array<Table, 2> clade_tables(const TreeMarkovModel& m, int v) {
    const PhyloTree& t = m.tree;
    const Node& node = t.node(v);
    std::size_t n = t.num_leaves();
    std::array<Table, 2> out;
    if (node.leaf >= 0) {
        Pattern bit = Pattern{1} << (n - 1 - static_cast<std::size_t>(node.leaf));
        out[0].emplace(0, Rational(1));
        out[1].emplace(bit, Rational(1));
        return out;
    }
    out[0].emplace(0, Rational(1));
    out[1].emplace(0, Rational(1));
    for (int c : node.children) {
        auto below = clade_tables(m, c);
        const Rational& p = m.edge_flip[static_cast<std::size_t>(c)];
        Rational q = 1 - p;
        for (int s = 0; s < 2; ++s) {
            // distribution of the child's clade given state s here
            Table up;
            for (const auto& [pat, v2] : below[static_cast<std::size_t>(s)])
                if (q != 0) up[pat] += q * v2;
            for (const auto& [pat, v2] : below[static_cast<std::size_t>(1 - s)])
                if (p != 0) up[pat] += p * v2;
            Table prod;
            for (const auto& [a, va] : out[static_cast<std::size_t>(s)])
                for (const auto& [b, vb] : up)
                    if (vb != 0) prod[a | b] += va * vb;
            out[static_cast<std::size_t>(s)] = std::move(prod);
        }
    }
    return out;
}

std::uint64_t threshold53(const Rational& p) {
    // floor(p * 2^53), so that (u >> 11) < threshold has probability p up to 2^-53
    if (p >= 1) return std::uint64_t{1} << 53;
    Integer k = floor_rational(Rational(p * Rational(Integer(1) << 53)));
    return static_cast<std::uint64_t>(k.get_ui());
}

Rational json_rational(const nlohmann::json& v, const std::string& what) {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number()) return parse_rational(v.dump());
    throw ParseError(what + " must be a number or a rational string");
}

} // namespace

void validate_model(const TreeMarkovModel& m) {
    if (m.tree.num_nodes() == 0) throw ValidationError("model has an empty tree");
    if (m.pi < 0 || m.pi > 1) throw ValidationError("root probability outside [0, 1]");
    if (m.edge_flip.size() != m.tree.num_nodes()) throw ValidationError("model needs one flip parameter per node");
    for (std::size_t v = 0; v < m.edge_flip.size(); ++v) {
        if (static_cast<int>(v) == m.tree.root()) continue;
        if (m.edge_flip[v] < 0 || m.edge_flip[v] > 1)
            throw ValidationError("flip parameter outside [0, 1] on edge " + edge_key(m.tree, static_cast<int>(v)));
    }
}

BoundaryDistribution boundary_map(const TreeMarkovModel& m) {
    validate_model(m);
    if (m.tree.num_leaves() > 24) throw ValidationError("boundary_map is limited to 24 leaves");
    auto tab = clade_tables(m, m.tree.root());
    BoundaryDistribution d;
    d.leaves = m.tree.leaf_names();
    Rational root1 = 1 - m.pi;
    for (const auto& [pat, v] : tab[0])
        if (m.pi != 0 && v != 0) d.p[pat] += m.pi * v;
    for (const auto& [pat, v] : tab[1])
        if (root1 != 0 && v != 0) d.p[pat] += root1 * v;
    for (auto it = d.p.begin(); it != d.p.end();) it = it->second == 0 ? d.p.erase(it) : std::next(it);
    return d;
}

Rational compose_flips(const Rational& a, const Rational& b) {
    return a + b - 2 * a * b;
}

TreeMarkovModel graft_models(const TreeMarkovModel& m1, const TreeMarkovModel& m2, const std::string& shared_leaf) {
    validate_model(m1);
    validate_model(m2);
    auto l2 = m2.tree.find_leaf(shared_leaf);
    if (l2 && m2.tree.node(m2.tree.leaf_node(*l2)).parent != m2.tree.root())
        throw ValidationError("shared leaf '" + shared_leaf + "' must be a child of the second model's root");
    GraftResult g = graft_detailed(m1.tree, m2.tree, shared_leaf);
    TreeMarkovModel out;
    out.pi = m1.pi;
    out.edge_flip.assign(g.tree.num_nodes(), Rational(0));
    for (std::size_t v = 0; v < g.tree.num_nodes(); ++v) {
        Rational p = 0;
        for (const auto& [which, id] : g.edge_sources[v])
            p = compose_flips(p, (which == 1 ? m1 : m2).edge_flip[static_cast<std::size_t>(id)]);
        out.edge_flip[v] = p;
    }
    out.tree = std::move(g.tree);
    return out;
}

SplitMix64::result_type SplitMix64::operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

PatternCounts sample_patterns(const TreeMarkovModel& m, std::uint64_t count, SplitMix64& rng) {
    validate_model(m);
    const PhyloTree& t = m.tree;
    std::size_t n = t.num_leaves();
    if (n > 64) throw ValidationError("sampling is limited to 64 leaves");
    std::vector<int> order{t.root()};
    for (std::size_t i = 0; i < order.size(); ++i)
        for (int c : t.node(order[i]).children) order.push_back(c);
    std::vector<std::uint64_t> thr(t.num_nodes());
    for (std::size_t v = 0; v < t.num_nodes(); ++v)
        thr[v] = static_cast<int>(v) == t.root() ? threshold53(m.pi) : threshold53(m.edge_flip[v]);
    PatternCounts c;
    c.leaves = t.leaf_names();
    std::vector<int> state(t.num_nodes());
    for (std::uint64_t k = 0; k < count; ++k) {
        Pattern pat = 0;
        for (int v : order) {
            auto uv = static_cast<std::size_t>(v);
            bool event = (rng() >> 11) < thr[uv];
            if (v == t.root())
                state[uv] = event ? 0 : 1;
            else
                state[uv] = state[static_cast<std::size_t>(t.node(v).parent)] ^ static_cast<int>(event);
            if (t.node(v).leaf >= 0 && state[uv] == 1)
                pat |= Pattern{1} << (n - 1 - static_cast<std::size_t>(t.node(v).leaf));
        }
        ++c.counts[pat];
        ++c.total;
    }
    return c;
}

PatternCounts sample_patterns(const TreeMarkovModel& m, std::uint64_t count, std::uint64_t seed) {
    SplitMix64 rng(seed);
    return sample_patterns(m, count, rng);
}

std::string edge_key(const PhyloTree& t, int node) {
    std::string key;
    LeafMask c = t.clade(node);
    for (std::size_t i = 0; i < t.num_leaves(); ++i) {
        if (!((c >> i) & 1)) continue;
        if (!key.empty()) key += ',';
        key += t.leaf_names()[i];
    }
    return key;
}

TreeMarkovModel parse_model_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("model JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("tree")) throw ParseError("model JSON needs a \"tree\" field");
    TreeMarkovModel m;
    m.tree = parse_newick(j.at("tree").get<std::string>());
    m.pi = j.contains("pi") ? json_rational(j.at("pi"), "pi") : Rational(1, 2);
    std::unordered_map<std::string, int> keys;
    for (std::size_t v = 0; v < m.tree.num_nodes(); ++v)
        if (static_cast<int>(v) != m.tree.root()) keys[edge_key(m.tree, static_cast<int>(v))] = static_cast<int>(v);
    m.edge_flip.assign(m.tree.num_nodes(), Rational(0));
    std::vector<char> set(m.tree.num_nodes(), 0);
    std::optional<Rational> fallback;
    if (j.contains("edges")) {
        if (!j.at("edges").is_object()) throw ParseError("model JSON \"edges\" must be an object");
        for (const auto& [k, v] : j.at("edges").items()) {
            if (k == "default") {
                fallback = json_rational(v, "default");
                continue;
            }
            auto it = keys.find(k);
            if (it == keys.end()) throw ValidationError("model edge '" + k + "' is not an edge of the tree");
            m.edge_flip[static_cast<std::size_t>(it->second)] = json_rational(v, "edge " + k);
            set[static_cast<std::size_t>(it->second)] = 1;
        }
    }
    for (const auto& [k, v] : keys) {
        if (set[static_cast<std::size_t>(v)]) continue;
        if (!fallback) throw ValidationError("model has no parameter for edge '" + k + "'");
        m.edge_flip[static_cast<std::size_t>(v)] = *fallback;
    }
    validate_model(m);
    return m;
}

TreeMarkovModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model_json(ss.str());
}

std::string model_to_json(const TreeMarkovModel& m) {
    nlohmann::ordered_json j;
    j["tree"] = write_newick(m.tree);
    j["pi"] = to_pq(m.pi);
    nlohmann::ordered_json edges = nlohmann::ordered_json::object();
    for (std::size_t v = 0; v < m.tree.num_nodes(); ++v)
        if (static_cast<int>(v) != m.tree.root()) edges[edge_key(m.tree, static_cast<int>(v))] = to_pq(m.edge_flip[v]);
    j["edges"] = edges;
    return j.dump(2);
}

} // namespace phyloalg

#include "cli.hpp"

#include "phyloalg/dataset.hpp"
#include "phyloalg/error.hpp"
#include "phyloalg/flatten.hpp"
#include "phyloalg/invariants.hpp"
#include "phyloalg/markov.hpp"
#include "phyloalg/ranking.hpp"
#include "phyloalg/spectral.hpp"
#include "phyloalg/tree.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace phyloalg::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct RunConfig {
    std::string data;
    std::string dialect = "sswl";
    std::string languages;
    std::string trees;
    std::vector<std::string> newick;
    std::string criteria = "linf,l1,dist";
    bool conditional = false;
    std::string weights;
    std::string distribution;
    std::vector<std::string> matrices;
    std::string snap = "none";
    std::vector<std::string> splits;
    std::string model;
    std::optional<std::uint64_t> samples;
    std::uint64_t seed = 1;
    std::string format;
    std::string out;
    std::string leaf;
    std::string ancient;
    std::vector<std::string> leaves;
    int n = 0;
    bool dedup = false;
};

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

// A path to a one-name-per-line file, or a comma-separated list.
std::vector<std::string> language_list(const std::string& spec) {
    if (fs::is_regular_file(spec)) return load_leaf_order(spec);
    auto names = split_commas(spec);
    if (names.empty()) throw ValidationError("empty language list");
    return names;
}

Snap snap_mode(const std::string& s) {
    return s == "auto" ? Snap::Auto : Snap::None;
}

struct LoadedDistribution {
    BoundaryDistribution p;
    std::optional<std::uint64_t> n_variables;
};

LoadedDistribution input_distribution(const RunConfig& c) {
    if (c.data.empty() == c.distribution.empty())
        throw ValidationError("give exactly one of --data and --distribution");
    LoadedDistribution out;
    if (!c.data.empty()) {
        Dialect d = c.dialect == "langelin" ? Dialect::Langelin : Dialect::Sswl;
        TraitTable table = load_table(c.data, format_for_path(c.data), d);
        std::vector<std::string> langs = c.languages.empty() ? table.languages : language_list(c.languages);
        TraitTable mapped = completely_mapped(table, langs);
        if (mapped.variables.empty()) throw ValidationError("no variable is mapped for every requested language");
        out.n_variables = mapped.variables.size();
        out.p = c.weights.empty() ? boundary_distribution(count_patterns(mapped))
                                  : weighted_boundary_distribution(mapped, load_weights(c.weights));
    } else {
        if (!c.weights.empty()) throw ValidationError("--weights needs --data");
        out.p = load_distribution(c.distribution);
        if (!c.languages.empty()) out.p = reorder_leaves(out.p, language_list(c.languages));
    }
    return out;
}

std::vector<NamedTree> input_trees(const RunConfig& c) {
    std::vector<NamedTree> trees;
    if (!c.trees.empty()) trees = load_tree_file(c.trees);
    for (const auto& text : c.newick) trees.push_back({"T" + std::to_string(trees.size() + 1), parse_newick(text)});
    if (trees.empty()) throw ValidationError("no trees given (use --trees or Newick arguments)");
    return trees;
}

// "candidate<TAB>label<TAB>path" lines; paths are relative to the manifest.
std::vector<MatrixCandidate> load_manifest(const std::string& path, Snap snap) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open matrix manifest '" + path + "'");
    fs::path base = fs::path(path).parent_path();
    std::vector<MatrixCandidate> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, '\t')) {
            item.erase(item.find_last_not_of(" \r") + 1);
            f.push_back(item);
        }
        if (f.size() != 3)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected 'candidate<TAB>label<TAB>matrix path'");
        fs::path mpath = fs::path(f[2]).is_absolute() ? fs::path(f[2]) : base / f[2];
        auto it = std::find_if(out.begin(), out.end(), [&](const MatrixCandidate& m) { return m.id == f[0]; });
        if (it == out.end()) {
            out.push_back({f[0], "", {}});
            it = std::prev(out.end());
        }
        it->flattenings.push_back({f[1], load_matrix(mpath.string(), snap)});
    }
    if (out.empty()) throw ValidationError("matrix manifest '" + path + "' lists no matrices");
    return out;
}

// Matrices named on the command line, or flattenings of a distribution
// along --split arguments.
std::vector<NamedFlattening> input_matrices(const RunConfig& c) {
    std::vector<NamedFlattening> out;
    if (!c.matrices.empty()) {
        if (!c.data.empty() || !c.distribution.empty()) throw ValidationError("give either --matrix or a distribution");
        for (const auto& m : c.matrices) out.push_back({m, load_matrix(m, snap_mode(c.snap))});
        return out;
    }
    LoadedDistribution d = input_distribution(c);
    if (c.splits.empty()) throw ValidationError("give at least one --split");
    for (const auto& s : c.splits) {
        EdgeSplit e = parse_split(s, d.p.leaves);
        out.push_back({format_split(e, d.p.leaves), flatten(d.p, e).matrix});
    }
    return out;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : ",") + to_sci5(x);
    return s;
}

// ---------------------------------------------------------------------------

void cmd_analyze(const RunConfig& c, std::ostream& out) {
    auto criteria = parse_criteria(c.criteria);
    RankingReport r;
    if (!c.matrices.empty()) {
        if (c.matrices.size() != 1) throw ValidationError("analyze takes a single --matrix manifest");
        r = rank_matrices(load_manifest(c.matrices.front(), snap_mode(c.snap)), criteria);
    } else {
        LoadedDistribution d = input_distribution(c);
        r = rank(d.p, input_trees(c), criteria, c.conditional);
        r.n_variables = d.n_variables;
    }
    write_report(out, r, c.format.empty() ? "json" : c.format);
}

void cmd_flatten(const RunConfig& c, std::ostream& out) {
    std::string format = c.format.empty() ? "tsv" : c.format;
    auto mats = input_matrices(c);
    if (format == "json") {
        ordered_json j = ordered_json::array();
        for (const auto& m : mats) {
            ordered_json e;
            e["label"] = m.label;
            e["rows"] = m.matrix.rows;
            e["cols"] = m.matrix.cols;
            ordered_json rows = ordered_json::array();
            for (std::size_t i = 0; i < m.matrix.rows; ++i) {
                ordered_json row = ordered_json::array();
                for (std::size_t k = 0; k < m.matrix.cols; ++k) row.push_back(to_pq(m.matrix.at(i, k)));
                rows.push_back(row);
            }
            e["matrix"] = rows;
            j.push_back(e);
        }
        out << j.dump(2) << '\n';
        return;
    }
    for (const auto& m : mats) {
        out << "#matrix\t" << m.label << '\t' << m.matrix.rows << 'x' << m.matrix.cols << '\n';
        write_matrix(out, m.matrix, format == "table");
    }
}

void cmd_invariants(const RunConfig& c, std::ostream& out) {
    std::string format = c.format.empty() ? "tsv" : c.format;
    auto mats = input_matrices(c);
    std::vector<SplitScore> parts;
    for (const auto& m : mats) {
        SplitScore s;
        s.norms = minor_norms(m.matrix);
        s.degenerate = m.matrix.rows < 3 || m.matrix.cols < 3;
        parts.push_back(std::move(s));
    }
    InvariantScore total = combine_split_scores(parts);
    auto note = [](const SplitScore& s) { return s.degenerate ? std::string("degenerate: fewer than 3 rows or columns") : std::string("-"); };
    if (format == "json") {
        ordered_json j;
        j["inputs"] = ordered_json::array();
        for (std::size_t i = 0; i < mats.size(); ++i) {
            ordered_json e;
            e["label"] = mats[i].label;
            e["linf"] = to_pq(parts[i].norms.linf);
            e["l1"] = to_pq(parts[i].norms.l1);
            e["minor_count"] = parts[i].norms.minor_count;
            e["degenerate"] = parts[i].degenerate;
            j["inputs"].push_back(e);
        }
        j["total"] = {{"linf", to_pq(total.linf)}, {"l1", to_pq(total.l1)}, {"minor_count", total.minor_count}};
        out << j.dump(2) << '\n';
        return;
    }
    bool table = format == "table";
    auto row = [&](const std::string& label, const MinorNorms& n, const std::string& nt) {
        if (table)
            out << fmt::format("{}\t{} ({})\t{} ({})\t{}\t{}\n", label, to_pq(n.linf), to_sci5(n.linf), to_pq(n.l1),
                               to_sci5(n.l1), n.minor_count, nt);
        else
            out << label << '\t' << to_pq(n.linf) << '\t' << to_pq(n.l1) << '\t' << n.minor_count << '\t' << nt << '\n';
    };
    out << "#input\tlinf\tl1\tminor_count\tnote\n";
    for (std::size_t i = 0; i < mats.size(); ++i) row(mats[i].label, parts[i].norms, note(parts[i]));
    row("total", MinorNorms{total.linf, total.l1, total.minor_count}, "-");
}

void cmd_distance(const RunConfig& c, std::ostream& out) {
    std::string format = c.format.empty() ? "tsv" : c.format;
    auto mats = input_matrices(c);
    std::vector<SpectralResult> res;
    std::vector<std::pair<EdgeSplit, double>> per;
    bool non_unique = false;
    for (const auto& m : mats) {
        res.push_back(spectral_summary(m.matrix));
        per.emplace_back(EdgeSplit{}, res.back().dist_sq_rank2);
        non_unique = non_unique || !res.back().unique_minimizer;
    }
    DistanceEstimate est = combine_distances(std::move(per), non_unique);
    if (format == "json") {
        ordered_json j;
        j["inputs"] = ordered_json::array();
        for (std::size_t i = 0; i < mats.size(); ++i) {
            ordered_json e;
            e["label"] = mats[i].label;
            e["rows"] = mats[i].matrix.rows;
            e["cols"] = mats[i].matrix.cols;
            e["singular_values"] = res[i].singular_values;
            e["dist_sq"] = res[i].dist_sq_rank2;
            e["unique_minimizer"] = res[i].unique_minimizer;
            j["inputs"].push_back(e);
        }
        j["dist_sq_lb"] = est.lower_bound;
        j["non_unique_minimizer"] = est.non_unique;
        out << j.dump(2) << '\n';
        return;
    }
    out << "#input\tshape\tdist_sq\tsingular_values\tnote\n";
    for (std::size_t i = 0; i < mats.size(); ++i)
        out << mats[i].label << '\t' << mats[i].matrix.rows << 'x' << mats[i].matrix.cols << '\t'
            << to_sci5(res[i].dist_sq_rank2) << '\t' << join_doubles(res[i].singular_values) << '\t'
            << (res[i].unique_minimizer ? "-" : "non_unique_minimizer") << '\n';
    out << "lower_bound\t-\t" << to_sci5(est.lower_bound) << "\t-\t" << (est.non_unique ? "non_unique_minimizer" : "-")
        << '\n';
}

void cmd_simulate(const RunConfig& c, std::ostream& out) {
    if (c.model.empty()) throw ValidationError("simulate needs --model");
    TreeMarkovModel m = load_model(c.model);
    if (c.samples) {
        if (*c.samples == 0) throw ValidationError("--samples must be at least 1");
        PatternCounts counts = sample_patterns(m, *c.samples, c.seed);
        out << "#rng\t" << SplitMix64::algorithm << '\t' << c.seed << '\n';
        write_counts(out, counts);
    } else {
        write_distribution(out, boundary_map(m));
    }
}

void write_tree_list(std::ostream& out, const std::vector<NamedTree>& trees, const std::string& format) {
    if (format == "json") {
        ordered_json j = ordered_json::array();
        for (const auto& t : trees) j.push_back({{"id", t.id}, {"newick", write_newick(t.tree) + ";"}});
        out << j.dump(2) << '\n';
        return;
    }
    for (const auto& t : trees) {
        if (format == "tsv") out << t.id << '\t';
        out << write_newick(t.tree) << ";\n";
    }
}

void cmd_trees(const std::string& sub, const RunConfig& c, std::ostream& out) {
    std::string format = c.format.empty() ? "tsv" : c.format;
    std::vector<NamedTree> result;
    if (sub == "enumerate") {
        std::vector<std::string> names = c.leaves;
        if (names.empty())
            for (int i = 1; i <= c.n; ++i) names.push_back("l" + std::to_string(i));
        if (names.empty()) throw ValidationError("enumerate needs --n or --leaves");
        std::vector<LeafLabel> labels;
        for (std::size_t i = 0; i < names.size(); ++i) labels.push_back({names[i], static_cast<int>(i)});
        auto topos = enumerate_unrooted_binary(labels);
        for (std::size_t i = 0; i < topos.size(); ++i)
            result.push_back({"E" + std::to_string(i + 1), tree_from_topology(topos[i], names)});
    } else if (sub == "resolve") {
        for (const auto& t : input_trees(c)) {
            auto res = c.dedup ? resolve_multifurcations(t.tree) : rooted_resolutions(t.tree);
            for (std::size_t i = 0; i < res.size(); ++i) result.push_back({t.id + "." + std::to_string(i + 1), res[i]});
        }
    } else if (sub == "graft") {
        auto trees = input_trees(c);
        if (trees.size() != 2) throw ValidationError("graft needs exactly two trees");
        if (c.leaf.empty()) throw ValidationError("graft needs --leaf");
        result.push_back({trees[0].id + "+" + trees[1].id, graft(trees[0].tree, trees[1].tree, c.leaf)});
    } else if (sub == "ancient-move") {
        auto pair = split_commas(c.ancient);
        if (pair.size() != 2) throw ValidationError("--ancient needs two leaf names, e.g. A,B");
        for (const auto& t : input_trees(c)) {
            auto res = ancient_pair_resolutions(t.tree, pair[0], pair[1]);
            for (std::size_t i = 0; i < res.size(); ++i) result.push_back({t.id + "." + std::to_string(i + 1), res[i]});
        }
    }
    write_tree_list(out, result, format);
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Phylogenetic invariants and distances for binary trait data", "phyloalg"};
    app.require_subcommand(1);
    auto formats = CLI::IsMember({"json", "table", "tsv"});

    auto add_input = [&](CLI::App* s) {
        s->add_option("--data", c.data, "Language x variable table (.tsv or .csv)");
        s->add_option("--dialect", c.dialect, "Table dialect when the file has no #dialect line")
            ->check(CLI::IsMember({"sswl", "langelin"}));
        s->add_option("--languages", c.languages, "Language order: a file with one name per line, or A,B,C");
        s->add_option("--weights", c.weights, "Variable weights file (variable<TAB>rational)");
        s->add_option("--distribution", c.distribution, "Boundary distribution or counts file");
        s->add_option("--snap", c.snap, "Decimal matrix entries: none, or auto (common denominator)")
            ->check(CLI::IsMember({"none", "auto"}));
    };
    auto add_output = [&](CLI::App* s) {
        s->add_option("--format", c.format, "Output format")->check(formats);
        s->add_option("--out", c.out, "Write output to this file");
    };

    auto* analyze = app.add_subcommand("analyze", "Score and rank candidate trees");
    add_input(analyze);
    add_output(analyze);
    analyze->add_option("--trees", c.trees, "Candidate tree file");
    analyze->add_option("newick", c.newick, "Candidate trees as Newick strings");
    analyze->add_option("--criteria", c.criteria, "Subset of linf,l1,dist");
    analyze->add_flag("--conditional", c.conditional, "Use only splits not shared by all candidates");
    analyze->add_option("--matrix", c.matrices, "Matrix manifest (candidate<TAB>label<TAB>path)");

    std::vector<std::pair<std::string, CLI::App*>> matrix_cmds;
    for (const char* name : {"flatten", "invariants", "distance"}) {
        auto* s = app.add_subcommand(name, std::string(name) == "flatten"      ? "Flatten a distribution along splits"
                                           : std::string(name) == "invariants" ? "3x3 minor norms of flattenings"
                                                                               : "Squared distance to rank-2 matrices");
        add_input(s);
        add_output(s);
        s->add_option("--split", c.splits, "Leaf bipartition A,B|C,D (repeatable)");
        s->add_option("--matrix", c.matrices, "Matrix file (repeatable)");
        matrix_cmds.emplace_back(name, s);
    }

    auto* simulate = app.add_subcommand("simulate", "Exact or sampled distribution of a Markov model");
    simulate->add_option("--model", c.model, "Model JSON file");
    simulate->add_option("--samples", c.samples, "Number of sampled patterns (exact distribution when omitted)");
    simulate->add_option("--seed", c.seed, "Generator seed");
    simulate->add_option("--out", c.out, "Write output to this file");

    auto* trees = app.add_subcommand("trees", "Tree manipulations");
    trees->require_subcommand(1);
    std::vector<std::pair<std::string, CLI::App*>> tree_cmds;
    for (const char* name : {"resolve", "enumerate", "graft", "ancient-move"}) {
        auto* s = trees->add_subcommand(name);
        add_output(s);
        tree_cmds.emplace_back(name, s);
    }
    tree_cmds[0].second->description("Binary refinements of multifurcations");
    tree_cmds[0].second->add_option("--trees", c.trees, "Tree file");
    tree_cmds[0].second->add_option("newick", c.newick, "Trees as Newick strings");
    tree_cmds[0].second->add_flag("--dedup", c.dedup, "Keep one refinement per unrooted topology");
    tree_cmds[1].second->description("All unrooted binary topologies");
    tree_cmds[1].second->add_option("--n", c.n, "Leaf count (leaves l1..ln)");
    tree_cmds[1].second->add_option("--leaves", c.leaves, "Leaf names")->delimiter(',');
    tree_cmds[2].second->description("Join two trees at a shared leaf");
    tree_cmds[2].second->add_option("--trees", c.trees, "Tree file with two trees");
    tree_cmds[2].second->add_option("newick", c.newick, "Trees as Newick strings");
    tree_cmds[2].second->add_option("--leaf", c.leaf, "Shared leaf");
    tree_cmds[3].second->description("Rearrangements of an ancient cherry next to the root");
    tree_cmds[3].second->add_option("--trees", c.trees, "Tree file");
    tree_cmds[3].second->add_option("newick", c.newick, "Trees as Newick strings");
    tree_cmds[3].second->add_option("--ancient", c.ancient, "The cherry, as A,B");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        std::ofstream file;
        if (!c.out.empty()) {
            file.open(c.out);
            if (!file) throw ValidationError("cannot write '" + c.out + "'");
        }
        std::ostream& dst = c.out.empty() ? out : file;
        if (analyze->parsed()) cmd_analyze(c, dst);
        for (const auto& [name, s] : matrix_cmds) {
            if (!s->parsed()) continue;
            if (name == "flatten") cmd_flatten(c, dst);
            if (name == "invariants") cmd_invariants(c, dst);
            if (name == "distance") cmd_distance(c, dst);
        }
        if (simulate->parsed()) cmd_simulate(c, dst);
        for (const auto& [name, s] : tree_cmds)
            if (s->parsed()) cmd_trees(name, c, dst);
        if (file.is_open() && !file.flush()) throw ValidationError("cannot write '" + c.out + "'");
    } catch (const LeafMismatchError& e) {
        err << "error: leaf mismatch: " << e.what() << '\n';
        return kExitLeafMismatch;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitOk;
}

} // namespace phyloalg::cli

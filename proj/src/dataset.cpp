#include "phyloalg/dataset.hpp"

#include "phyloalg/error.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace phyloalg {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(trim(field));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

Cell parse_cell(const std::string& tok, Dialect d, const std::string& where) {
    if (tok == "?") return Cell::Unknown;
    if (tok == "1" || tok == "+1") return Cell::Plus;
    if (d == Dialect::Sswl) {
        if (tok == "0") return Cell::Minus;
    } else {
        if (tok == "-1") return Cell::Minus;
        if (tok == "0") return Cell::Zero;
    }
    throw ParseError(where + ": unknown cell token '" + tok + "'");
}

std::ifstream open_input(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw ValidationError(std::string("cannot open ") + what + " '" + path + "'");
    return in;
}

} // namespace

std::size_t TraitTable::language_index(const std::string& name) const {
    auto it = std::find(languages.begin(), languages.end(), name);
    if (it == languages.end()) throw ValidationError("unknown language '" + name + "'");
    return static_cast<std::size_t>(it - languages.begin());
}

std::string pattern_string(Pattern p, std::size_t n) {
    std::string s(n, '0');
    for (std::size_t i = 0; i < n; ++i)
        if ((p >> (n - 1 - i)) & 1) s[i] = '1';
    return s;
}

Pattern parse_pattern(const std::string& text) {
    if (text.empty() || text.size() > 64) throw ParseError("invalid pattern '" + text + "'");
    Pattern p = 0;
    for (char c : text) {
        if (c != '0' && c != '1') throw ParseError("invalid pattern '" + text + "'");
        p = (p << 1) | static_cast<Pattern>(c == '1');
    }
    return p;
}

Rational BoundaryDistribution::at(Pattern pattern) const {
    auto it = p.find(pattern);
    return it == p.end() ? Rational(0) : it->second;
}

Rational BoundaryDistribution::total() const {
    Rational t = 0;
    for (const auto& [k, v] : p) t += v;
    return t;
}

// ============================================================================
// Tables
// ============================================================================

TableFormat format_for_path(const std::string& path) {
    auto dot = path.rfind('.');
    if (dot != std::string::npos) {
        std::string ext = path.substr(dot + 1);
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == "csv") return TableFormat::Csv;
    }
    return TableFormat::Tsv;
}

TraitTable parse_table(std::istream& in, TableFormat format, Dialect fallback, const std::string& source) {
    char sep = format == TableFormat::Csv ? ',' : '\t';
    Dialect dialect = fallback;
    TraitTable t;
    bool have_header = false;
    std::unordered_set<std::string> langs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        if (trimmed[0] == '#') {
            auto f = split_ws(trimmed.substr(1));
            if (!have_header && f.size() == 2 && f[0] == "dialect") {
                if (f[1] == "sswl")
                    dialect = Dialect::Sswl;
                else if (f[1] == "langelin")
                    dialect = Dialect::Langelin;
                else
                    throw ParseError(source + ":" + std::to_string(lineno) + ": unknown dialect '" + f[1] + "'");
            }
            continue;
        }
        auto fields = split_fields(line, sep);
        std::string where = source + ":" + std::to_string(lineno);
        if (!have_header) {
            have_header = true;
            std::unordered_set<std::string> vars;
            for (std::size_t i = 1; i < fields.size(); ++i) {
                if (fields[i].empty()) throw ParseError(where + ": empty variable id in header");
                if (!vars.insert(fields[i]).second)
                    throw ParseError(where + ": duplicate variable id '" + fields[i] + "'");
                t.variables.push_back(fields[i]);
            }
            if (t.variables.empty()) throw ParseError(where + ": table has no variables");
            continue;
        }
        if (fields.size() != t.variables.size() + 1)
            throw ParseError(where + ": ragged row with " + std::to_string(fields.size() - 1) + " cells, expected " +
                             std::to_string(t.variables.size()));
        if (fields[0].empty()) throw ParseError(where + ": empty language name");
        if (!langs.insert(fields[0]).second) throw ParseError(where + ": duplicate language '" + fields[0] + "'");
        t.languages.push_back(fields[0]);
        std::vector<Cell> row;
        for (std::size_t j = 1; j < fields.size(); ++j)
            row.push_back(parse_cell(fields[j], dialect, where + ", column " + std::to_string(j + 1)));
        t.cells.push_back(std::move(row));
    }
    if (!have_header) throw ParseError(source + ": table has no header row");
    return t;
}

TraitTable load_table(const std::string& path, TableFormat format, Dialect fallback) {
    auto in = open_input(path, "table");
    return parse_table(in, format, fallback, path);
}

TraitTable completely_mapped(const TraitTable& table, const std::vector<std::string>& languages) {
    std::vector<std::size_t> rows;
    std::unordered_set<std::string> seen;
    for (const auto& l : languages) {
        if (!seen.insert(l).second) throw ValidationError("language '" + l + "' requested twice");
        rows.push_back(table.language_index(l));
    }
    TraitTable out;
    out.languages = languages;
    out.cells.resize(rows.size());
    for (std::size_t v = 0; v < table.variables.size(); ++v) {
        bool mapped = std::all_of(rows.begin(), rows.end(), [&](std::size_t r) {
            Cell c = table.cells[r][v];
            return c == Cell::Plus || c == Cell::Minus;
        });
        if (!mapped) continue;
        out.variables.push_back(table.variables[v]);
        for (std::size_t i = 0; i < rows.size(); ++i) out.cells[i].push_back(table.cells[rows[i]][v]);
    }
    return out;
}

// ============================================================================
// Counts and distributions
// ============================================================================

namespace {

Pattern variable_pattern(const TraitTable& t, std::size_t v) {
    std::size_t n = t.languages.size();
    Pattern p = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Cell c = t.cells[i][v];
        if (c != Cell::Plus && c != Cell::Minus)
            throw ValidationError("variable '" + t.variables[v] + "' is not mapped for '" + t.languages[i] + "'");
        p = (p << 1) | static_cast<Pattern>(c == Cell::Plus);
    }
    return p;
}

void check_width(std::size_t n) {
    if (n == 0 || n > 64) throw ValidationError("patterns need 1 to 64 languages, got " + std::to_string(n));
}

} // namespace

PatternCounts count_patterns(const TraitTable& table) {
    check_width(table.languages.size());
    PatternCounts c;
    c.leaves = table.languages;
    for (std::size_t v = 0; v < table.variables.size(); ++v) {
        ++c.counts[variable_pattern(table, v)];
        ++c.total;
    }
    return c;
}

BoundaryDistribution boundary_distribution(const PatternCounts& counts) {
    if (counts.total == 0) throw ValidationError("no variables: boundary distribution undefined (N = 0)");
    BoundaryDistribution d;
    d.leaves = counts.leaves;
    Integer total(std::to_string(counts.total));
    for (const auto& [pat, k] : counts.counts) {
        if (k == 0) continue;
        Rational r(Integer(std::to_string(k)), total);
        r.canonicalize();
        d.p.emplace(pat, r);
    }
    return d;
}

Rational weight_normalizer(const TraitTable& table, const VariableWeighting& weights) {
    Rational z = 0;
    for (const auto& v : table.variables) {
        auto it = weights.weights.find(v);
        if (it == weights.weights.end()) throw ValidationError("missing weight for variable '" + v + "'");
        if (it->second < 0) throw ValidationError("negative weight for variable '" + v + "'");
        z += it->second;
    }
    return z;
}

BoundaryDistribution weighted_boundary_distribution(const TraitTable& table, const VariableWeighting& weights) {
    check_width(table.languages.size());
    Rational z = weight_normalizer(table, weights);
    if (z == 0) throw ValidationError("weights sum to zero");
    BoundaryDistribution d;
    d.leaves = table.languages;
    for (std::size_t v = 0; v < table.variables.size(); ++v) {
        const Rational& w = weights.weights.at(table.variables[v]);
        if (w == 0) {
            variable_pattern(table, v);
            continue;
        }
        d.p[variable_pattern(table, v)] += w / z;
    }
    return d;
}

VariableWeighting load_weights(const std::string& path) {
    auto in = open_input(path, "weights file");
    VariableWeighting w;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto f = split_ws(line);
        if (f.empty()) continue;
        std::string where = path + ":" + std::to_string(lineno);
        if (f.size() != 2) throw ParseError(where + ": expected 'variable<TAB>weight'");
        Rational r;
        try {
            r = parse_rational(f[1]);
        } catch (const ParseError& e) {
            throw ParseError(where + ": " + e.what());
        }
        if (!w.weights.emplace(f[0], r).second) throw ParseError(where + ": duplicate weight for '" + f[0] + "'");
    }
    return w;
}

BoundaryDistribution parse_distribution(std::istream& in, const std::string& source) {
    BoundaryDistribution d;
    bool counts = false, have_leaves = false;
    std::map<Pattern, Rational> raw;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string where = source + ":" + std::to_string(lineno);
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            auto f = split_ws(t.substr(1));
            if (!f.empty() && f[0] == "leaves") {
                d.leaves.assign(f.begin() + 1, f.end());
                have_leaves = true;
            } else if (f.size() == 2 && f[0] == "kind") {
                if (f[1] != "counts" && f[1] != "distribution")
                    throw ParseError(where + ": unknown kind '" + f[1] + "'");
                counts = f[1] == "counts";
            }
            continue;
        }
        if (!have_leaves) throw ParseError(where + ": missing '#leaves' header");
        auto f = split_ws(t);
        if (f.size() != 2) throw ParseError(where + ": expected 'pattern<TAB>value'");
        if (f[0].size() != d.leaves.size())
            throw ParseError(where + ": pattern '" + f[0] + "' does not have " + std::to_string(d.leaves.size()) +
                             " bits");
        Pattern p = parse_pattern(f[0]);
        Rational v;
        try {
            v = parse_rational(f[1]);
        } catch (const ParseError& e) {
            throw ParseError(where + ": " + e.what());
        }
        if (v < 0) throw ParseError(where + ": negative value");
        if (counts && v.get_den() != 1) throw ParseError(where + ": counts must be integers");
        if (!raw.emplace(p, v).second) throw ParseError(where + ": duplicate pattern '" + f[0] + "'");
    }
    if (!have_leaves) throw ParseError(source + ": missing '#leaves' header");
    check_width(d.leaves.size());
    {
        std::unordered_set<std::string> names(d.leaves.begin(), d.leaves.end());
        if (names.size() != d.leaves.size()) throw ParseError(source + ": duplicate leaf name");
    }
    Rational total = 0;
    for (const auto& [k, v] : raw) total += v;
    if (total == 0) throw ValidationError(source + ": distribution is empty");
    if (!counts && total != 1)
        throw ValidationError(source + ": probabilities sum to " + to_pq(total) + ", not 1");
    for (const auto& [k, v] : raw)
        if (v != 0) d.p.emplace(k, counts ? Rational(v / total) : v);
    return d;
}

BoundaryDistribution load_distribution(const std::string& path) {
    auto in = open_input(path, "distribution file");
    return parse_distribution(in, path);
}

void write_distribution(std::ostream& out, const BoundaryDistribution& p) {
    out << "#leaves";
    for (const auto& l : p.leaves) out << '\t' << l;
    out << '\n';
    for (const auto& [k, v] : p.p) out << pattern_string(k, p.n()) << '\t' << to_pq(v) << '\n';
}

void write_counts(std::ostream& out, const PatternCounts& c) {
    out << "#leaves";
    for (const auto& l : c.leaves) out << '\t' << l;
    out << "\n#kind\tcounts\n";
    for (const auto& [k, v] : c.counts) out << pattern_string(k, c.n()) << '\t' << v << '\n';
}

BoundaryDistribution reorder_leaves(const BoundaryDistribution& p, const std::vector<std::string>& order) {
    std::size_t n = p.n();
    if (order.size() != n) throw LeafMismatchError("leaf order has the wrong size");
    std::vector<std::size_t> src(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto it = std::find(p.leaves.begin(), p.leaves.end(), order[i]);
        if (it == p.leaves.end()) throw LeafMismatchError("leaf '" + order[i] + "' not in distribution");
        src[i] = static_cast<std::size_t>(it - p.leaves.begin());
    }
    BoundaryDistribution d;
    d.leaves = order;
    for (const auto& [k, v] : p.p) {
        Pattern q = 0;
        for (std::size_t i = 0; i < n; ++i) q = (q << 1) | ((k >> (n - 1 - src[i])) & 1);
        d.p.emplace(q, v);
    }
    return d;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string distribution_digest(const BoundaryDistribution& p) {
    std::ostringstream os;
    write_distribution(os, p);
    return sha256_hex(os.str());
}

} // namespace phyloalg

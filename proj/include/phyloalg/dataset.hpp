#pragma once

#include "phyloalg/rational.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace phyloalg {

enum class Cell { Plus, Minus, Zero, Unknown };

// SSWL tables are strictly binary (0 means Minus); LanGeLin tables are
// ternary (1, -1, and 0 for undefined).  Both accept ? for unknown.
enum class Dialect { Sswl, Langelin };

enum class TableFormat { Tsv, Csv };

struct TraitTable {
    std::vector<std::string> languages;
    std::vector<std::string> variables;
    std::vector<std::vector<Cell>> cells; // cells[language][variable]

    std::size_t language_index(const std::string& name) const;
};

// Leaf patterns are stored as integers, big-endian: leaf 0 is the most
// significant of the n bits, so pattern "0110" is the integer 6.
using Pattern = std::uint64_t;

std::string pattern_string(Pattern p, std::size_t n);
Pattern parse_pattern(const std::string& text);

struct PatternCounts {
    std::vector<std::string> leaves;
    std::map<Pattern, std::uint64_t> counts;
    std::uint64_t total = 0;

    std::size_t n() const { return leaves.size(); }
};

// Nonnegative exact tensor over {0,1}^n.  Zero entries are not stored.
struct BoundaryDistribution {
    std::vector<std::string> leaves;
    std::map<Pattern, Rational> p;

    std::size_t n() const { return leaves.size(); }
    Rational at(Pattern pattern) const;
    Rational total() const;
};

struct VariableWeighting {
    std::map<std::string, Rational> weights;
};

// The per-file dialect may be set by a first line "#dialect<TAB>sswl" or
// "#dialect<TAB>langelin"; otherwise `fallback` is used.
TraitTable parse_table(std::istream& in, TableFormat format, Dialect fallback, const std::string& source = "<input>");
TraitTable load_table(const std::string& path, TableFormat format, Dialect fallback);
TableFormat format_for_path(const std::string& path);

// Restricts to `languages` (in that order) and to variables that are Plus or
// Minus for every one of them.  An empty result is allowed.
TraitTable completely_mapped(const TraitTable& table, const std::vector<std::string>& languages);

PatternCounts count_patterns(const TraitTable& table);

BoundaryDistribution boundary_distribution(const PatternCounts& counts);

// Sum of weights of the table's variables.
Rational weight_normalizer(const TraitTable& table, const VariableWeighting& weights);
BoundaryDistribution weighted_boundary_distribution(const TraitTable& table, const VariableWeighting& weights);

// "variable<TAB>rational" per line.
VariableWeighting load_weights(const std::string& path);

// Distribution and count files:
//   #leaves<TAB>name1<TAB>name2...
//   #kind<TAB>counts            (optional; values are then integer counts)
//   0110<TAB>3/7
BoundaryDistribution parse_distribution(std::istream& in, const std::string& source = "<input>");
BoundaryDistribution load_distribution(const std::string& path);
void write_distribution(std::ostream& out, const BoundaryDistribution& p);
void write_counts(std::ostream& out, const PatternCounts& c);

// Same distribution over a permuted leaf order.
BoundaryDistribution reorder_leaves(const BoundaryDistribution& p, const std::vector<std::string>& order);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

// Hex SHA-256 of the canonical text form written by write_distribution.
std::string distribution_digest(const BoundaryDistribution& p);

} // namespace phyloalg

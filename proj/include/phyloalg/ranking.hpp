#pragma once

#include "phyloalg/dataset.hpp"
#include "phyloalg/flatten.hpp"
#include "phyloalg/invariants.hpp"
#include "phyloalg/rational.hpp"
#include "phyloalg/spectral.hpp"
#include "phyloalg/tree.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace phyloalg {

enum class Criterion { Linf, L1, Dist };

std::string_view criterion_name(Criterion c);
// Comma-separated subset of "linf,l1,dist"; order is normalized and
// duplicates removed.
std::vector<Criterion> parse_criteria(std::string_view text);

// Distances closer than this are reported as tied.
inline constexpr double kDistanceTieBand = 1e-12;

struct SplitDetail {
    std::string label; // "A,B|C,D" or the matrix's label
    MinorNorms norms;
    bool degenerate = false;
    double dist_sq = 0;
    bool unique_minimizer = true;
};

struct CandidateScore {
    std::string id;
    std::string newick; // empty for matrix-only candidates
    std::optional<Rational> linf;
    std::optional<Rational> l1;
    std::optional<double> dist_sq_lb;
    std::uint64_t minor_count = 0;
    std::vector<SplitDetail> splits;
    std::vector<std::string> flags; // degenerate_flattening, non_unique_minimizer, tie:<criterion>, no_splits
};

struct Winner {
    std::string id;
    std::vector<std::string> tied; // every candidate at the minimum, in tie-break order
    bool tie() const { return tied.size() > 1; }
};

struct RankingReport {
    std::string digest;
    std::size_t n_languages = 0;
    std::optional<std::uint64_t> n_variables;
    std::vector<std::string> leaves;
    std::vector<Criterion> criteria;
    bool conditional = false;
    std::vector<CandidateScore> candidates;
    std::map<Criterion, Winner> winners;
    // "consistent": every criterion has the same strict winner.
    // "tied": the criteria's minimum sets share a candidate but some are ties.
    // "inconsistent": two criteria have disjoint minimum sets.
    std::string agreement;
};

struct NamedFlattening {
    std::string label;
    RationalMatrix matrix;
};

// A candidate given directly by its flattening matrices.
struct MatrixCandidate {
    std::string id;
    std::string newick;
    std::vector<NamedFlattening> flattenings;
};

// Scores every tree on the requested criteria.  With `conditional`, only the
// splits that are not shared by all candidates are used; otherwise every
// internal split.  Throws ValidationError for an empty list and
// LeafMismatchError when a tree's leaves differ from the distribution's.
RankingReport rank(const BoundaryDistribution& p, const std::vector<NamedTree>& trees,
                   const std::vector<Criterion>& criteria, bool conditional);

// Same scoring and verdict for candidates supplied as matrices.
RankingReport rank_matrices(const std::vector<MatrixCandidate>& candidates, const std::vector<Criterion>& criteria);

std::string report_json(const RankingReport& r);
void write_report(std::ostream& out, const RankingReport& r, std::string_view format); // json, table, tsv

} // namespace phyloalg

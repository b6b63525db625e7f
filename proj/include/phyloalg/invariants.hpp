#pragma once

#include "phyloalg/dataset.hpp"
#include "phyloalg/flatten.hpp"
#include "phyloalg/rational.hpp"
#include "phyloalg/tree.hpp"

#include <cstdint>
#include <vector>

namespace phyloalg {

struct MinorNorms {
    Rational linf = 0;
    Rational l1 = 0;
    std::uint64_t minor_count = 0;
};

// Exact max and sum of |det| over all 3x3 minors.  Matrices with fewer than
// 3 rows or columns have no minors and give (0, 0) with minor_count 0.
MinorNorms minor_norms(const RationalMatrix& m);

struct SplitScore {
    EdgeSplit split;
    MinorNorms norms;
    bool degenerate = false; // fewer than 3 rows or columns
};

struct InvariantScore {
    Rational linf = 0;
    Rational l1 = 0;
    std::uint64_t minor_count = 0;
    std::vector<SplitScore> per_split;
};

// Max of per-split maxima and sum of per-split sums.
InvariantScore combine_split_scores(std::vector<SplitScore> parts);

// `splits` use p's leaf indexing and must be internal edges of `tree`.
InvariantScore tree_invariant_score(const BoundaryDistribution& p, const PhyloTree& tree,
                                    const std::vector<EdgeSplit>& splits);

// Checks that each split is an internal edge of the tree (after aligning the
// tree to `leaves`).  Returns the aligned tree.
PhyloTree check_tree_splits(const std::vector<std::string>& leaves, const PhyloTree& tree,
                            const std::vector<EdgeSplit>& splits);

} // namespace phyloalg

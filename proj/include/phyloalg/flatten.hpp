#pragma once

#include "phyloalg/dataset.hpp"
#include "phyloalg/rational.hpp"
#include "phyloalg/tree.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace phyloalg {

struct RationalMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Rational> data; // row-major

    RationalMatrix() = default;
    RationalMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

    Rational& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const Rational& at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    RationalMatrix transposed() const;
};

struct Flattening {
    EdgeSplit split;
    RationalMatrix matrix;
};

// Rows are indexed by the side_a leaves (ascending leaf index, first leaf
// most significant), columns likewise by side_b.
Flattening flatten(const BoundaryDistribution& p, const EdgeSplit& split);

// For each tree (in input order), its internal splits minus those shared by
// every tree.  Splits are expressed over trees[0]'s leaf indexing.
std::vector<std::vector<EdgeSplit>> distinguishing_splits(const std::vector<PhyloTree>& trees);

// Exact rank by Gaussian elimination over the rationals.
std::size_t rational_rank(const RationalMatrix& m);

enum class Snap { None, Auto };

// Reads a whitespace-separated matrix of rationals or decimals ('#' comments).
// Decimals are exact ("0.0606" is 606/10^4).  With Snap::Auto the entries
// are replaced by k/N for the smallest N such that each entry is within half
// a unit of its last printed digit and the k sum to N.
RationalMatrix parse_matrix(std::istream& in, Snap snap = Snap::None, const std::string& source = "<input>");
RationalMatrix load_matrix(const std::string& path, Snap snap = Snap::None);

// Smallest N <= max_denominator fitting the rule above, or 0 if none.
long snap_denominator(const std::vector<Rational>& values, const std::vector<int>& places, long max_denominator = 100000);

// Tab-separated; rationals as p/q, or 5-significant-digit decimals.
void write_matrix(std::ostream& out, const RationalMatrix& m, bool decimal = false);

} // namespace phyloalg

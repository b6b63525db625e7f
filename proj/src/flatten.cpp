#include "phyloalg/flatten.hpp"

#include "phyloalg/error.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace phyloalg {

RationalMatrix RationalMatrix::transposed() const {
    RationalMatrix t(cols, rows);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) t.at(j, i) = at(i, j);
    return t;
}

Flattening flatten(const BoundaryDistribution& p, const EdgeSplit& split) {
    std::size_t n = p.n();
    if (split.num_leaves() != n)
        throw LeafMismatchError("split covers " + std::to_string(split.num_leaves()) + " leaves, distribution has " +
                                std::to_string(n));
    LeafMask all = n == 64 ? ~LeafMask{0} : (LeafMask{1} << n) - 1;
    if ((split.mask_a() | split.mask_b()) != all || (split.mask_a() & split.mask_b()) != 0)
        throw LeafMismatchError("split does not partition the distribution's leaves");
    if (split.side_a.empty() || split.side_b.empty()) throw ValidationError("split has an empty side");
    if (n > 20) throw ValidationError("flattenings are limited to 20 leaves");
    std::size_t ra = split.side_a.size(), rb = split.side_b.size();
    Flattening f{split, RationalMatrix(std::size_t{1} << ra, std::size_t{1} << rb)};
    auto bit = [n](Pattern pat, int leaf) { return (pat >> (n - 1 - static_cast<std::size_t>(leaf))) & 1; };
    for (const auto& [pat, v] : p.p) {
        std::size_t u = 0, w = 0;
        for (int l : split.side_a) u = (u << 1) | bit(pat, l);
        for (int l : split.side_b) w = (w << 1) | bit(pat, l);
        f.matrix.at(u, w) = v;
    }
    return f;
}

std::vector<std::vector<EdgeSplit>> distinguishing_splits(const std::vector<PhyloTree>& trees) {
    std::vector<std::vector<EdgeSplit>> per;
    if (trees.empty()) return per;
    const auto& order = trees.front().leaf_names();
    for (const auto& t : trees) {
        PhyloTree aligned = t.with_leaf_order(order);
        per.push_back(internal_edge_splits(aligned));
    }
    std::set<EdgeSplit> common(per.front().begin(), per.front().end());
    for (const auto& s : per) {
        std::set<EdgeSplit> next;
        for (const auto& e : s)
            if (common.count(e)) next.insert(e);
        common = std::move(next);
    }
    for (auto& s : per) s.erase(std::remove_if(s.begin(), s.end(), [&](const EdgeSplit& e) { return common.count(e) > 0; }), s.end());
    return per;
}

std::size_t rational_rank(const RationalMatrix& m) {
    std::vector<Rational> a = m.data;
    std::size_t rank = 0;
    for (std::size_t c = 0; c < m.cols && rank < m.rows; ++c) {
        std::size_t piv = rank;
        while (piv < m.rows && a[piv * m.cols + c] == 0) ++piv;
        if (piv == m.rows) continue;
        if (piv != rank)
            for (std::size_t j = 0; j < m.cols; ++j) std::swap(a[piv * m.cols + j], a[rank * m.cols + j]);
        for (std::size_t i = rank + 1; i < m.rows; ++i) {
            if (a[i * m.cols + c] == 0) continue;
            Rational f = a[i * m.cols + c] / a[rank * m.cols + c];
            for (std::size_t j = c; j < m.cols; ++j) a[i * m.cols + j] -= f * a[rank * m.cols + j];
        }
        ++rank;
    }
    return rank;
}

long snap_denominator(const std::vector<Rational>& values, const std::vector<int>& places, long max_denominator) {
    std::vector<Rational> half;
    for (int d : places) {
        Integer p10;
        mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(d));
        half.emplace_back(Integer(1), Integer(2 * p10));
    }
    const Rational one_half(1, 2);
    for (long n = 1; n <= max_denominator; ++n) {
        Integer sum = 0;
        bool ok = true;
        for (std::size_t i = 0; i < values.size() && ok; ++i) {
            Rational scaled = values[i] * n;
            Integer k = floor_rational(Rational(scaled + one_half));
            Rational err = Rational(k) - scaled;
            if (abs(err) > half[i] * n) ok = false;
            sum += k;
        }
        if (ok && sum == n) return n;
    }
    return 0;
}

RationalMatrix parse_matrix(std::istream& in, Snap snap, const std::string& source) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::stringstream ss(line);
        std::vector<std::string> row;
        std::string tok;
        while (ss >> tok) row.push_back(tok);
        if (row.empty()) continue;
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError(source + ": ragged matrix row " + std::to_string(rows.size() + 1));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(source + ": empty matrix");
    RationalMatrix m(rows.size(), rows.front().size());
    std::vector<int> places;
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) {
            try {
                m.at(i, j) = parse_rational(rows[i][j]);
                places.push_back(decimal_places(rows[i][j]));
            } catch (const ParseError& e) {
                throw ParseError(source + ": row " + std::to_string(i + 1) + ", column " + std::to_string(j + 1) +
                                 ": " + e.what());
            }
        }
    if (snap == Snap::Auto) {
        long n = snap_denominator(m.data, places);
        if (n == 0) throw ValidationError(source + ": no common denominator fits the printed digits");
        for (auto& v : m.data) {
            Integer k = floor_rational(Rational(v * n + Rational(1, 2)));
            v = Rational(k, Integer(n));
            v.canonicalize();
        }
    }
    return m;
}

RationalMatrix load_matrix(const std::string& path, Snap snap) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open matrix file '" + path + "'");
    return parse_matrix(in, snap, path);
}

void write_matrix(std::ostream& out, const RationalMatrix& m, bool decimal) {
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            if (j) out << '\t';
            out << (decimal ? to_sci5(m.at(i, j)) : to_pq(m.at(i, j)));
        }
        out << '\n';
    }
}

} // namespace phyloalg

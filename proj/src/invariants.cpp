#include "phyloalg/invariants.hpp"

#include "phyloalg/error.hpp"
#include "phyloalg/parallel.hpp"

#include <algorithm>
#include <utility>

namespace phyloalg {

namespace {

using i128 = __int128;

Integer to_integer(i128 v) {
    bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
    Integer hi(static_cast<unsigned long>(u >> 64));
    Integer lo(static_cast<unsigned long>(static_cast<std::uint64_t>(u)));
    Integer r = (hi << 64) + lo;
    return neg ? Integer(-r) : r;
}

template <typename T> T abs_of(const T& v) { return v < 0 ? T(-v) : v; }

// Partial (max, sum) of |det| for a range of (r2, r3) row pairs, where each
// pair is combined with every r1 < r2.  T is the entry type, W the product
// and accumulator type.
template <typename T, typename W>
std::pair<W, W> minor_range(const std::vector<T>& a, std::size_t rows, std::size_t cols,
                            const std::vector<std::pair<std::size_t, std::size_t>>& pairs, std::size_t begin,
                            std::size_t end) {
    W best = 0, sum = 0;
    std::vector<T> m2(cols * cols);
    std::vector<char> zero_row(rows);
    for (std::size_t r = 0; r < rows; ++r)
        zero_row[r] = std::all_of(a.begin() + static_cast<std::ptrdiff_t>(r * cols),
                                  a.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols),
                                  [](const T& x) { return x == 0; });
    for (std::size_t idx = begin; idx < end; ++idx) {
        auto [r2, r3] = pairs[idx];
        if (zero_row[r2] || zero_row[r3]) continue;
        const T* x = &a[r2 * cols];
        const T* y = &a[r3 * cols];
        bool any = false;
        for (std::size_t c1 = 0; c1 < cols; ++c1)
            for (std::size_t c2 = c1 + 1; c2 < cols; ++c2) {
                T v = x[c1] * y[c2] - x[c2] * y[c1];
                any = any || v != 0;
                m2[c1 * cols + c2] = v;
            }
        if (!any) continue;
        for (std::size_t r1 = 0; r1 < r2; ++r1) {
            if (zero_row[r1]) continue;
            const T* z = &a[r1 * cols];
            for (std::size_t c1 = 0; c1 < cols; ++c1)
                for (std::size_t c2 = c1 + 1; c2 < cols; ++c2)
                    for (std::size_t c3 = c2 + 1; c3 < cols; ++c3) {
                        W det = W(z[c1]) * W(m2[c2 * cols + c3]) - W(z[c2]) * W(m2[c1 * cols + c3]) +
                                W(z[c3]) * W(m2[c1 * cols + c2]);
                        if (det == 0) continue;
                        W ad = abs_of(det);
                        if (ad > best) best = ad;
                        sum += ad;
                    }
        }
    }
    return {best, sum};
}

std::uint64_t choose3(std::uint64_t k) {
    return k < 3 ? 0 : k * (k - 1) * (k - 2) / 6;
}

} // namespace

MinorNorms minor_norms(const RationalMatrix& m) {
    MinorNorms out;
    if (m.rows < 3 || m.cols < 3) return out;
    out.minor_count = choose3(m.rows) * choose3(m.cols);

    Integer den = 1;
    for (const auto& v : m.data) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), v.get_den_mpz_t());
    std::vector<Integer> ints;
    ints.reserve(m.data.size());
    Integer max_abs = 0;
    for (const auto& v : m.data) {
        Integer k = v.get_num() * (den / v.get_den());
        if (abs(k) > max_abs) max_abs = abs(k);
        ints.push_back(std::move(k));
    }

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t r3 = 0; r3 < m.rows; ++r3)
        for (std::size_t r2 = 0; r2 < r3; ++r2) pairs.emplace_back(r2, r3);

    std::size_t workers = worker_count();
    Integer best = 0, sum = 0;
    if (max_abs < (Integer(1) << 30)) {
        std::vector<std::int64_t> a;
        for (const auto& k : ints) a.push_back(k.get_si());
        std::vector<std::pair<i128, i128>> partial(workers, {0, 0});
        parallel_chunks(pairs.size(), [&](std::size_t b, std::size_t e, std::size_t w) {
            partial[w] = minor_range<std::int64_t, i128>(a, m.rows, m.cols, pairs, b, e);
        }, workers);
        i128 bi = 0, si = 0;
        for (const auto& [pb, ps] : partial) {
            bi = std::max(bi, pb);
            si += ps;
        }
        best = to_integer(bi);
        sum = to_integer(si);
    } else {
        std::vector<std::pair<Integer, Integer>> partial(workers, {0, 0});
        parallel_chunks(pairs.size(), [&](std::size_t b, std::size_t e, std::size_t w) {
            partial[w] = minor_range<Integer, Integer>(ints, m.rows, m.cols, pairs, b, e);
        }, workers);
        for (const auto& [pb, ps] : partial) {
            if (pb > best) best = pb;
            sum += ps;
        }
    }
    Integer den3 = den * den * den;
    out.linf = Rational(best, den3);
    out.linf.canonicalize();
    out.l1 = Rational(sum, den3);
    out.l1.canonicalize();
    return out;
}

InvariantScore combine_split_scores(std::vector<SplitScore> parts) {
    InvariantScore s;
    for (const auto& p : parts) {
        if (p.norms.linf > s.linf) s.linf = p.norms.linf;
        s.l1 += p.norms.l1;
        s.minor_count += p.norms.minor_count;
    }
    s.per_split = std::move(parts);
    return s;
}

PhyloTree check_tree_splits(const std::vector<std::string>& leaves, const PhyloTree& tree,
                            const std::vector<EdgeSplit>& splits) {
    PhyloTree aligned = tree.with_leaf_order(leaves);
    if (splits.empty()) return aligned;
    auto edges = internal_edge_splits(aligned);
    for (const auto& s : splits) {
        bool found = std::any_of(edges.begin(), edges.end(), [&](const EdgeSplit& e) { return e.same_bipartition(s); });
        if (!found)
            throw ValidationError("split " + format_split(s, leaves) + " is not an edge of " + write_newick(aligned));
    }
    return aligned;
}

InvariantScore tree_invariant_score(const BoundaryDistribution& p, const PhyloTree& tree,
                                    const std::vector<EdgeSplit>& splits) {
    check_tree_splits(p.leaves, tree, splits);
    std::vector<SplitScore> parts;
    for (const auto& s : splits) {
        Flattening f = flatten(p, s);
        SplitScore sc{s, minor_norms(f.matrix), f.matrix.rows < 3 || f.matrix.cols < 3};
        parts.push_back(std::move(sc));
    }
    return combine_split_scores(std::move(parts));
}

} // namespace phyloalg

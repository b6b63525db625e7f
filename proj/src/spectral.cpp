#include "phyloalg/spectral.hpp"

#include "phyloalg/error.hpp"
#include "phyloalg/invariants.hpp"

#include <algorithm>
#include <cmath>

namespace phyloalg {

Eigen::MatrixXd to_double(const RationalMatrix& m) {
    Eigen::MatrixXd d(static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols));
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j)
            d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m.at(i, j).get_d();
    return d;
}

std::vector<double> singular_values(const Eigen::MatrixXd& m) {
    if (!m.allFinite()) throw ValidationError("matrix has a non-finite entry");
    if (m.size() == 0) return {};
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    std::vector<double> out(s.data(), s.data() + s.size());
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

double tail_sq(const std::vector<double>& sigma, int k) {
    double t = 0;
    for (std::size_t i = static_cast<std::size_t>(k); i < sigma.size(); ++i) t += sigma[i] * sigma[i];
    return t;
}

double eckart_young_dist_sq(const Eigen::MatrixXd& m, int k) {
    if (k < 0 || k > std::min(m.rows(), m.cols()))
        throw ValidationError("rank " + std::to_string(k) + " out of range for a " + std::to_string(m.rows()) + "x" +
                              std::to_string(m.cols()) + " matrix");
    return tail_sq(singular_values(m), k);
}

bool minimizer_unique(const std::vector<double>& sigma, int k) {
    auto uk = static_cast<std::size_t>(k);
    if (k <= 0 || uk >= sigma.size()) return true;
    double tol = 1e-9 * sigma.front();
    if (sigma[uk] <= tol) return true;
    return std::abs(sigma[uk - 1] - sigma[uk]) >= tol;
}

SpectralResult spectral_summary(const RationalMatrix& m) {
    SpectralResult r;
    r.singular_values = singular_values(to_double(m));
    r.dist_sq_rank2 = tail_sq(r.singular_values, 2);
    r.unique_minimizer = minimizer_unique(r.singular_values, 2);
    return r;
}

DistanceEstimate combine_distances(std::vector<std::pair<EdgeSplit, double>> per_split, bool non_unique) {
    DistanceEstimate d;
    for (const auto& [s, v] : per_split) d.lower_bound = std::max(d.lower_bound, v);
    d.per_split = std::move(per_split);
    d.non_unique = non_unique;
    return d;
}

DistanceEstimate tree_distance_estimate(const BoundaryDistribution& p, const PhyloTree& tree,
                                        const std::vector<EdgeSplit>& splits) {
    check_tree_splits(p.leaves, tree, splits);
    std::vector<std::pair<EdgeSplit, double>> per;
    bool non_unique = false;
    for (const auto& s : splits) {
        SpectralResult r = spectral_summary(flatten(p, s).matrix);
        per.emplace_back(s, r.dist_sq_rank2);
        non_unique = non_unique || !r.unique_minimizer;
    }
    return combine_distances(std::move(per), non_unique);
}

} // namespace phyloalg

#pragma once

#include "phyloalg/dataset.hpp"
#include "phyloalg/flatten.hpp"
#include "phyloalg/tree.hpp"

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace phyloalg {

Eigen::MatrixXd to_double(const RationalMatrix& m);

// Descending singular values, min(rows, cols) of them.
std::vector<double> singular_values(const Eigen::MatrixXd& m);

// Squared Frobenius distance to the matrices of rank <= k:
// sigma_{k+1}^2 + ... + sigma_min^2.
double eckart_young_dist_sq(const Eigen::MatrixXd& m, int k);
double tail_sq(const std::vector<double>& sigma, int k);

// False when sigma_k and sigma_{k+1} coincide within 1e-9 * sigma_1, i.e.
// the nearest rank-k matrix is not unique.  A zero tail (rank <= k) is
// always unique.
bool minimizer_unique(const std::vector<double>& sigma, int k);

struct SpectralResult {
    std::vector<double> singular_values;
    double dist_sq_rank2 = 0;
    bool unique_minimizer = true;
};

SpectralResult spectral_summary(const RationalMatrix& m);

struct DistanceEstimate {
    std::vector<std::pair<EdgeSplit, double>> per_split;
    double lower_bound = 0; // max of per_split
    bool non_unique = false;
};

DistanceEstimate combine_distances(std::vector<std::pair<EdgeSplit, double>> per_split, bool non_unique);

DistanceEstimate tree_distance_estimate(const BoundaryDistribution& p, const PhyloTree& tree,
                                        const std::vector<EdgeSplit>& splits);

} // namespace phyloalg

#ifndef CAUSAL_CLUSTERING_HPP
#define CAUSAL_CLUSTERING_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "causal/errors.hpp"
#include "causal/pcca.hpp"

namespace causal::clustering {

using Eigen::MatrixXd;

struct ClusterAssignment {
    std::vector<int> labels;
    int k = 0;
};

struct GcClusterEntry {
    int cluster_id = 0;
    Eigen::Index n_samples = 0;
    double rho1 = 0.0;
    double gc_index = 0.0;
    bool flagged = false;        // true when the cluster was too small
    std::string flag_reason;
};

struct GcReport {
    std::vector<GcClusterEntry> per_cluster;
    double whole_series_gc = 0.0;
    double whole_series_rho1 = 0.0;
};

/// label_n = argmax_k resp(n,k); ties break to the lowest index.
ClusterAssignment hard_assign(const MatrixXd& responsibilities);

/// Lloyd's algorithm with k-means++ seeding; deterministic given seed.
/// Empty clusters are re-seeded to the farthest point.
ClusterAssignment kmeans(const MatrixXd& points, int k, std::uint64_t seed,
                         int max_iters = 300);

/// Fraction of samples whose true label is not the majority true label of
/// their estimated cluster.
double misallocation_rate(const ClusterAssignment& est,
                          const ClusterAssignment& truth);

/// Per-cluster GC via granger_from_blocks plus the whole-series value.
GcReport clusterwise_gc(const pcca::RegressionDataset& data,
                        const ClusterAssignment& assignment, double ridge);

}  // namespace causal::clustering

#endif

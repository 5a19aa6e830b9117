#include "causal/clustering.hpp"

#include <algorithm>
#include <limits>

#include "causal/rng.hpp"

namespace causal::clustering {

ClusterAssignment hard_assign(const MatrixXd& responsibilities) {
    const Eigen::Index n = responsibilities.rows();
    const Eigen::Index k = responsibilities.cols();
    ClusterAssignment out;
    out.k = static_cast<int>(k);
    out.labels.resize(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        int best = 0;
        double bv = responsibilities(i, 0);
        for (Eigen::Index j = 1; j < k; ++j) {
            if (responsibilities(i, j) > bv) {
                bv = responsibilities(i, j);
                best = static_cast<int>(j);
            }
        }
        out.labels[static_cast<size_t>(i)] = best;
    }
    return out;
}

namespace {

Eigen::VectorXd sq_dist_to(const MatrixXd& points, const Eigen::RowVectorXd& c) {
    return (points.rowwise() - c).rowwise().squaredNorm();
}

}  // namespace

ClusterAssignment kmeans(const MatrixXd& points, int k, std::uint64_t seed,
                         int max_iters) {
    const Eigen::Index n = points.rows();
    if (n < k) throw DomainError("kmeans: fewer points than clusters");
    Rng rng(seed);

    // k-means++ seeding
    MatrixXd centers(k, points.cols());
    centers.row(0) = points.row(static_cast<Eigen::Index>(
        rng.uniform_index(static_cast<std::uint64_t>(n))));
    Eigen::VectorXd d2 = sq_dist_to(points, centers.row(0));
    for (int j = 1; j < k; ++j) {
        const double total = d2.sum();
        Eigen::Index pick = 0;
        if (total > 0.0) {
            double target = rng.uniform() * total;
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2(i);
                if (acc >= target) { pick = i; break; }
            }
        } else {
            pick = static_cast<Eigen::Index>(
                rng.uniform_index(static_cast<std::uint64_t>(n)));
        }
        centers.row(j) = points.row(pick);
        d2 = d2.cwiseMin(sq_dist_to(points, centers.row(j)));
    }

    std::vector<int> labels(static_cast<size_t>(n), -1);
    for (int it = 0; it < max_iters; ++it) {
        // assignment
        bool changed = false;
        Eigen::VectorXd min_d(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double bv = std::numeric_limits<double>::infinity();
            for (int j = 0; j < k; ++j) {
                const double d = (points.row(i) - centers.row(j)).squaredNorm();
                if (d < bv) { bv = d; best = j; }
            }
            min_d(i) = bv;
            if (labels[static_cast<size_t>(i)] != best) {
                labels[static_cast<size_t>(i)] = best;
                changed = true;
            }
        }
        if (!changed && it > 0) break;

        // update
        for (int j = 0; j < k; ++j) {
            Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(points.cols());
            Eigen::Index cnt = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (labels[static_cast<size_t>(i)] == j) {
                    sum += points.row(i);
                    ++cnt;
                }
            }
            if (cnt > 0) {
                centers.row(j) = sum / static_cast<double>(cnt);
            } else {
                Eigen::Index far;
                min_d.maxCoeff(&far);
                centers.row(j) = points.row(far);
                min_d(far) = 0.0;
            }
        }
    }

    ClusterAssignment out;
    out.k = k;
    out.labels = std::move(labels);
    return out;
}

double misallocation_rate(const ClusterAssignment& est,
                          const ClusterAssignment& truth) {
    if (est.labels.size() != truth.labels.size())
        throw LengthMismatch("misallocation_rate: assignments differ in length");
    const size_t n = est.labels.size();
    if (n == 0) return 0.0;
    const int ek = std::max(est.k, 1 + *std::max_element(est.labels.begin(),
                                                         est.labels.end()));
    const int tk = std::max(truth.k, 1 + *std::max_element(truth.labels.begin(),
                                                           truth.labels.end()));
    // counts[e][t]
    std::vector<std::vector<long>> counts(static_cast<size_t>(ek),
                                          std::vector<long>(static_cast<size_t>(tk), 0));
    for (size_t i = 0; i < n; ++i)
        ++counts[static_cast<size_t>(est.labels[i])][static_cast<size_t>(truth.labels[i])];

    long minority = 0;
    for (int e = 0; e < ek; ++e) {
        long total = 0, majority = 0;
        for (int t = 0; t < tk; ++t) {
            total += counts[static_cast<size_t>(e)][static_cast<size_t>(t)];
            majority = std::max(majority,
                                counts[static_cast<size_t>(e)][static_cast<size_t>(t)]);
        }
        minority += total - majority;
    }
    return static_cast<double>(minority) / static_cast<double>(n);
}

GcReport clusterwise_gc(const pcca::RegressionDataset& data,
                        const ClusterAssignment& assignment, double ridge) {
    if (static_cast<Eigen::Index>(assignment.labels.size()) != data.n())
        throw LengthMismatch("clusterwise_gc: assignment length != N");

    GcReport report;
    const auto whole = pcca::granger_from_blocks(data, ridge);
    report.whole_series_gc = whole.gc_index;
    report.whole_series_rho1 = whole.rho1;

    for (int c = 0; c < assignment.k; ++c) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < data.n(); ++i)
            if (assignment.labels[static_cast<size_t>(i)] == c) idx.push_back(i);

        GcClusterEntry entry;
        entry.cluster_id = c;
        entry.n_samples = static_cast<Eigen::Index>(idx.size());

        pcca::RegressionDataset sub;
        sub.x.resize(entry.n_samples, data.x.cols());
        sub.y1.resize(entry.n_samples, data.y1.cols());
        sub.y2.resize(entry.n_samples, data.y2.cols());
        for (Eigen::Index i = 0; i < entry.n_samples; ++i) {
            sub.x.row(i) = data.x.row(idx[static_cast<size_t>(i)]);
            sub.y1.row(i) = data.y1.row(idx[static_cast<size_t>(i)]);
            sub.y2.row(i) = data.y2.row(idx[static_cast<size_t>(i)]);
        }
        try {
            const auto gc = pcca::granger_from_blocks(sub, ridge);
            entry.rho1 = gc.rho1;
            entry.gc_index = gc.gc_index;
        } catch (const InsufficientSamples& e) {
            entry.flagged = true;
            entry.flag_reason = e.what();
        } catch (const ConditioningError& e) {
            entry.flagged = true;
            entry.flag_reason = e.what();
        }
        report.per_cluster.push_back(std::move(entry));
    }
    return report;
}

}  // namespace causal::clustering

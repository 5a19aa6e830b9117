#ifndef CAUSAL_PREPROCESS_HPP
#define CAUSAL_PREPROCESS_HPP

#include <Eigen/Dense>

#include "causal/errors.hpp"
#include "causal/pcca.hpp"

namespace causal::preprocess {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Delay-embedding parameters: row t stacks tau/s past frames at stride s
/// starting at lag d.
struct EmbeddingSpec {
    Eigen::Index delay = 1;   // d
    Eigen::Index stride = 1;  // s
    Eigen::Index window = 1;  // tau, divisible by stride
    Eigen::Index frames() const { return window / stride; }
    void validate() const;
};

struct PcaBasis {
    VectorXd mean;
    MatrixXd components;       // d x r, orthonormal columns
    VectorXd explained_ratio;  // r descending values

    MatrixXd project(const MatrixXd& data) const;
};

/// First difference along time: (T-1) x d.
MatrixXd velocity(const MatrixXd& position);

/// Per-frame (position | velocity) aligned to times 1..T-1: (T-1) x 2d.
MatrixXd feature(const MatrixXd& position);

/// (T-d-tau+1) x (f*tau/s); row i corresponds to time t = d+tau-1+i.
MatrixXd embed(const MatrixXd& features, const EmbeddingSpec& spec);

/// PCA keeping the smallest basis whose cumulative explained variance
/// reaches target_ratio.
PcaBasis pca_fit(const MatrixXd& data, double target_ratio);

struct RegressionBlocks {
    pcca::RegressionDataset dataset;
    PcaBasis basis_y1;  // effect-present features
    PcaBasis basis_y2;  // cause-past embedding
    PcaBasis basis_x;   // effect-past embedding
};

/// y1 = PCA(effect feature at t), y2 = PCA(cause embedding),
/// x = PCA(effect embedding); rows mutually aligned in t.
/// Inputs are per-frame feature series (callers apply `feature` first when
/// velocity augmentation is wanted).
RegressionBlocks build_regression_blocks(const MatrixXd& effect,
                                         const MatrixXd& cause,
                                         const EmbeddingSpec& spec,
                                         double target_ratio);

}  // namespace causal::preprocess

#endif

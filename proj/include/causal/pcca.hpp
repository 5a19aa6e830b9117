#ifndef CAUSAL_PCCA_HPP
#define CAUSAL_PCCA_HPP

#include <Eigen/Dense>
#include <vector>

#include "causal/errors.hpp"

namespace causal::pcca {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Covariance blocks of (block1, block2, conditioning) variables,
/// estimated with denominator N.
struct CovarianceBundle {
    MatrixXd sigma_11;  // d1 x d1
    MatrixXd sigma_22;  // d2 x d2
    MatrixXd sigma_12;  // d1 x d2
    MatrixXd sigma_1x;  // d1 x dx
    MatrixXd sigma_2x;  // d2 x dx
    MatrixXd sigma_xx;  // dx x dx
    Eigen::Index n_samples = 0;

    Eigen::Index d1() const { return sigma_11.rows(); }
    Eigen::Index d2() const { return sigma_22.rows(); }
    Eigen::Index dx() const { return sigma_xx.rows(); }

    /// Throws if the symmetry/PSD invariants are violated.
    void validate() const;
};

/// Canonical correlations and paired directions from a PCCA solve.
struct PccaSolution {
    VectorXd rho;           // descending, in [0,1]
    MatrixXd directions_1;  // d1 x r
    MatrixXd directions_2;  // d2 x r
};

struct GcResult {
    double gc_index = 0.0;
    double rho1 = 0.0;
    std::vector<double> rho;
    Eigen::Index n_samples = 0;
};

/// Regression triples: conditioning block x, targets y1, y2 (row-aligned).
struct RegressionDataset {
    MatrixXd x;   // N x dx
    MatrixXd y1;  // N x d1
    MatrixXd y2;  // N x d2

    Eigen::Index n() const { return y1.rows(); }
    /// Stacked (y1 | y2), N x (d1+d2).
    MatrixXd stacked_y() const;
    void validate() const;
};

inline double default_ridge(const MatrixXd& m) {
    return m.rows() == 0 ? 0.0 : 1e-8 * m.trace() / static_cast<double>(m.rows());
}

/// sigma_ab - sigma_ac (sigma_cc + ridge I)^-1 sigma_cb.
/// Empty conditioning block (dc = 0) is the identity on sigma_ab.
MatrixXd partial_covariance(const MatrixXd& sigma_ab, const MatrixXd& sigma_ac,
                            const MatrixXd& sigma_cc, const MatrixXd& sigma_cb,
                            double ridge);

/// Solves the PCCA generalized eigenproblem on the bundle's partial
/// covariances (Cholesky-whitened symmetric form).
PccaSolution solve_pcca(const CovarianceBundle& bundle, double ridge);

/// GC index in bits: 0.5 * log2(1 / (1 - rho1^2)).
double granger_index(double rho1);

/// Sample covariances -> PCCA -> GC index, conditioning on the x block.
GcResult granger_from_blocks(const RegressionDataset& data, double ridge);

/// Covariance bundle from mean-centered sample blocks (denominator N).
CovarianceBundle covariances_from_blocks(const RegressionDataset& data);

}  // namespace causal::pcca

#endif

#ifndef CAUSAL_MPPCCA_HPP
#define CAUSAL_MPPCCA_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "causal/errors.hpp"
#include "causal/pcca.hpp"

namespace causal::mppcca {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using pcca::RegressionDataset;

/// One mixture component: y_n ~ N(W_x x_n + mu, Psi + W_t W_t^T).
struct ComponentParams {
    double pi = 0.0;
    VectorXd mu;    // d1+d2
    MatrixXd w_x;   // (d1+d2) x dx
    MatrixXd w_t;   // (d1+d2) x dt
    MatrixXd psi;   // (d1+d2) x (d1+d2), symmetric PSD
};

struct MppccaModel {
    std::vector<ComponentParams> components;
    Eigen::Index d1 = 0;
    Eigen::Index d2 = 0;
    Eigen::Index dt = 0;
    double eta_c = 1e-6;
    double eta_wx = 1e-6;

    Eigen::Index k() const { return static_cast<Eigen::Index>(components.size()); }
    Eigen::Index d() const { return d1 + d2; }
    void validate() const;
};

/// N x K row-stochastic posterior over components.
struct Responsibilities {
    MatrixXd r;
    void validate() const;
};

struct FitTrace {
    std::vector<double> log_likelihood_per_iter;
    int n_iters = 0;
    bool converged = false;
    std::uint64_t seed = 0;
    /// Per-step decreases beyond tolerance (see the Psi projection heuristic);
    /// empty when EM behaved monotonically.
    std::vector<int> monotonicity_violations;
};

struct FitConfig {
    double eta_c = 1e-6;
    double eta_wx = 1e-6;
    double tol = 1e-6;        // relative |dLL| convergence threshold
    int max_iters = 200;
    int restarts = 10;
    int reinit_retries = 3;
    std::uint64_t seed = 0;
    bool enforce_block_diagonal = false;
    /// restart 0 initializes from K contiguous time blocks, the rest from
    /// k-means with derived seeds
    bool temporal_block_restart = true;
};

/// C_k = Psi + W_t W_t^T + eta_c I.
MatrixXd component_covariance(const ComponentParams& c, double eta_c);

double log_likelihood(const MppccaModel& model, const RegressionDataset& data);

Responsibilities e_step(const MppccaModel& model, const RegressionDataset& data);

MppccaModel m_step(const RegressionDataset& data, const Responsibilities& resp,
                   const MppccaModel& prev);

struct FitResult {
    MppccaModel model;
    Responsibilities resp;
    FitTrace trace;
};

FitResult fit(const RegressionDataset& data, int k, int dt, const FitConfig& config);

/// Initial model from hard labels (one m_step over one-hot responsibilities).
MppccaModel init_from_labels(const RegressionDataset& data,
                             const std::vector<int>& labels, int k, int dt,
                             const FitConfig& config);

}  // namespace causal::mppcca

#endif

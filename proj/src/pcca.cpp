#include "causal/pcca.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace causal::pcca {

namespace {

constexpr double kRcondFloor = 1e-14;
constexpr double kRhoClamp = 1.0 - 1e-12;

void check_symmetric_psd(const MatrixXd& m, const char* name) {
    if (m.rows() != m.cols())
        throw DomainError(std::string(name) + " is not square");
    if (m.rows() == 0) return;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (((m - m.transpose()).cwiseAbs().maxCoeff()) > 1e-10 * scale)
        throw DomainError(std::string(name) + " is not symmetric");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
    if (es.eigenvalues().minCoeff() < -1e-8 * std::max(lmax, 1.0))
        throw DomainError(std::string(name) + " is not positive semidefinite");
}

/// Solve (M + ridge I) X = B for symmetric M, with an rcond guard.
MatrixXd ridge_solve(const MatrixXd& m, double ridge, const MatrixXd& b,
                     const char* what) {
    MatrixXd reg = m;
    reg.diagonal().array() += ridge;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(reg);
    const VectorXd& ev = es.eigenvalues();
    const double lmax = ev.cwiseAbs().maxCoeff();
    if (lmax <= 0.0 || ev.minCoeff() / lmax < kRcondFloor)
        throw ConditioningError(std::string(what) +
                                ": matrix numerically singular after ridge");
    return es.eigenvectors() *
           ev.cwiseInverse().asDiagonal() *
           (es.eigenvectors().transpose() * b);
}

}  // namespace

void CovarianceBundle::validate() const {
    if (n_samples < 2) throw DomainError("CovarianceBundle: n_samples < 2");
    check_symmetric_psd(sigma_11, "sigma_11");
    check_symmetric_psd(sigma_22, "sigma_22");
    check_symmetric_psd(sigma_xx, "sigma_xx");
    if (sigma_12.rows() != d1() || sigma_12.cols() != d2())
        throw DomainError("CovarianceBundle: sigma_12 shape mismatch");
    if (sigma_1x.rows() != d1() || sigma_1x.cols() != dx())
        throw DomainError("CovarianceBundle: sigma_1x shape mismatch");
    if (sigma_2x.rows() != d2() || sigma_2x.cols() != dx())
        throw DomainError("CovarianceBundle: sigma_2x shape mismatch");
}

MatrixXd RegressionDataset::stacked_y() const {
    MatrixXd y(y1.rows(), y1.cols() + y2.cols());
    y << y1, y2;
    return y;
}

void RegressionDataset::validate() const {
    if (y1.rows() != x.rows() || y2.rows() != x.rows())
        throw LengthMismatch("RegressionDataset: blocks have differing N");
    if (x.rows() < 1) throw DomainError("RegressionDataset: empty");
    if (!x.allFinite() || !y1.allFinite() || !y2.allFinite())
        throw DomainError("RegressionDataset: non-finite entries");
}

MatrixXd partial_covariance(const MatrixXd& sigma_ab, const MatrixXd& sigma_ac,
                            const MatrixXd& sigma_cc, const MatrixXd& sigma_cb,
                            double ridge) {
    if (sigma_cc.rows() == 0) return sigma_ab;
    if (sigma_ac.cols() != sigma_cc.rows() || sigma_cb.rows() != sigma_cc.rows())
        throw DomainError("partial_covariance: nonconformable dimensions");
    return sigma_ab - sigma_ac * ridge_solve(sigma_cc, ridge, sigma_cb,
                                             "partial_covariance");
}

PccaSolution solve_pcca(const CovarianceBundle& bundle, double ridge) {
    bundle.validate();

    const MatrixXd p11 = partial_covariance(bundle.sigma_11, bundle.sigma_1x,
                                            bundle.sigma_xx,
                                            bundle.sigma_1x.transpose(), ridge);
    const MatrixXd p22 = partial_covariance(bundle.sigma_22, bundle.sigma_2x,
                                            bundle.sigma_xx,
                                            bundle.sigma_2x.transpose(), ridge);
    const MatrixXd p12 = partial_covariance(bundle.sigma_12, bundle.sigma_1x,
                                            bundle.sigma_xx,
                                            bundle.sigma_2x.transpose(), ridge);

    const Eigen::Index r = std::min(bundle.d1(), bundle.d2());

    // M = p12^T p11^-1 p12, whitened by chol(p22): eigenvalues are rho^2.
    const MatrixXd m22 = p12.transpose() *
                         ridge_solve(p11, ridge, p12, "solve_pcca(p11)");

    MatrixXd reg22 = p22;
    reg22.diagonal().array() += ridge;
    Eigen::LLT<MatrixXd> llt22(reg22);
    if (llt22.info() != Eigen::Success)
        throw ConditioningError("solve_pcca: partial covariance p22 not PD after ridge");
    const MatrixXd l22 = llt22.matrixL();
    const MatrixXd white2 = l22.triangularView<Eigen::Lower>().solve(
        MatrixXd(l22.triangularView<Eigen::Lower>()
                     .solve(m22)
                     .transpose()));

    Eigen::SelfAdjointEigenSolver<MatrixXd> es2(white2);
    if (es2.info() != Eigen::Success)
        throw ConditioningError("solve_pcca: eigensolver failed");

    // Mirror problem for the block-1 directions.
    const MatrixXd m11 = p12 * ridge_solve(p22, ridge, p12.transpose(),
                                           "solve_pcca(p22)");
    MatrixXd reg11 = p11;
    reg11.diagonal().array() += ridge;
    Eigen::LLT<MatrixXd> llt11(reg11);
    if (llt11.info() != Eigen::Success)
        throw ConditioningError("solve_pcca: partial covariance p11 not PD after ridge");
    const MatrixXd l11 = llt11.matrixL();
    const MatrixXd white1 = l11.triangularView<Eigen::Lower>().solve(
        MatrixXd(l11.triangularView<Eigen::Lower>()
                     .solve(m11)
                     .transpose()));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es1(white1);

    PccaSolution sol;
    sol.rho.resize(r);
    sol.directions_1.resize(bundle.d1(), r);
    sol.directions_2.resize(bundle.d2(), r);
    for (Eigen::Index i = 0; i < r; ++i) {
        // eigh returns ascending order; take the top r, descending.
        const Eigen::Index j2 = bundle.d2() - 1 - i;
        const Eigen::Index j1 = bundle.d1() - 1 - i;
        const double lam = std::clamp(es2.eigenvalues()(j2), 0.0, kRhoClamp);
        sol.rho(i) = std::sqrt(lam);
        sol.directions_2.col(i) =
            l22.transpose().triangularView<Eigen::Upper>().solve(
                es2.eigenvectors().col(j2));
        sol.directions_1.col(i) =
            l11.transpose().triangularView<Eigen::Upper>().solve(
                es1.eigenvectors().col(j1));
    }
    return sol;
}

double granger_index(double rho1) {
    if (rho1 < 0.0) throw DomainError("granger_index: rho1 < 0");
    if (rho1 >= 1.0) {
        if (rho1 <= 1.0 + 1e-12)
            rho1 = kRhoClamp;
        else
            throw DomainError("granger_index: rho1 >= 1 (perfect predictability)");
    }
    if (rho1 == 0.0) return 0.0;
    return 0.5 * std::log2(1.0 / (1.0 - rho1 * rho1));
}

CovarianceBundle covariances_from_blocks(const RegressionDataset& data) {
    data.validate();
    const double n = static_cast<double>(data.n());
    const MatrixXd y1c = data.y1.rowwise() - data.y1.colwise().mean();
    const MatrixXd y2c = data.y2.rowwise() - data.y2.colwise().mean();
    const MatrixXd xc = data.x.rowwise() - data.x.colwise().mean();

    CovarianceBundle b;
    b.sigma_11 = y1c.transpose() * y1c / n;
    b.sigma_22 = y2c.transpose() * y2c / n;
    b.sigma_12 = y1c.transpose() * y2c / n;
    b.sigma_1x = y1c.transpose() * xc / n;
    b.sigma_2x = y2c.transpose() * xc / n;
    b.sigma_xx = xc.transpose() * xc / n;
    b.n_samples = data.n();
    return b;
}

GcResult granger_from_blocks(const RegressionDataset& data, double ridge) {
    data.validate();
    const Eigen::Index needed = data.x.cols() + data.y1.cols() + data.y2.cols();
    if (data.n() <= needed)
        throw InsufficientSamples("granger_from_blocks: need N > dx + d1 + d2");

    const CovarianceBundle bundle = covariances_from_blocks(data);
    const PccaSolution sol = solve_pcca(bundle, ridge);

    GcResult res;
    res.rho1 = sol.rho.size() > 0 ? sol.rho(0) : 0.0;
    res.gc_index = granger_index(res.rho1);
    res.rho.assign(sol.rho.data(), sol.rho.data() + sol.rho.size());
    res.n_samples = data.n();
    return res;
}

}  // namespace causal::pcca

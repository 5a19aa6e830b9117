#include "causal/preprocess.hpp"

#include <Eigen/Eigenvalues>

namespace causal::preprocess {

void EmbeddingSpec::validate() const {
    if (stride < 1) throw DomainError("EmbeddingSpec: stride must be >= 1");
    if (window < stride) throw DomainError("EmbeddingSpec: window < stride");
    if (window % stride != 0)
        throw DomainError("EmbeddingSpec: window not divisible by stride");
    if (delay < 0) throw DomainError("EmbeddingSpec: negative delay");
}

MatrixXd PcaBasis::project(const MatrixXd& data) const {
    return (data.rowwise() - mean.transpose()) * components;
}

MatrixXd velocity(const MatrixXd& position) {
    if (position.rows() < 2) throw TooShort("velocity: need at least 2 frames");
    return position.bottomRows(position.rows() - 1) -
           position.topRows(position.rows() - 1);
}

MatrixXd feature(const MatrixXd& position) {
    if (position.rows() < 2) throw TooShort("feature: need at least 2 frames");
    const Eigen::Index t = position.rows() - 1;
    MatrixXd out(t, 2 * position.cols());
    out.leftCols(position.cols()) = position.bottomRows(t);
    out.rightCols(position.cols()) = velocity(position);
    return out;
}

MatrixXd embed(const MatrixXd& features, const EmbeddingSpec& spec) {
    spec.validate();
    const Eigen::Index t_total = features.rows();
    const Eigen::Index f = features.cols();
    const Eigen::Index n = t_total - spec.delay - spec.window + 1;
    if (n < 1) throw TooShort("embed: series shorter than delay + window");

    MatrixXd out(n, f * spec.frames());
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index t = spec.delay + spec.window - 1 + i;
        for (Eigen::Index j = 0; j < spec.frames(); ++j)
            out.block(i, j * f, 1, f) =
                features.row(t - spec.delay - j * spec.stride);
    }
    return out;
}

PcaBasis pca_fit(const MatrixXd& data, double target_ratio) {
    if (data.rows() < 2) throw TooShort("pca_fit: need at least 2 samples");
    if (target_ratio <= 0.0 || target_ratio > 1.0)
        throw DomainError("pca_fit: target_ratio must be in (0,1]");

    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    PcaBasis basis;
    basis.mean = data.colwise().mean();
    const MatrixXd centered = data.rowwise() - basis.mean.transpose();
    const MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov);
    const double total = es.eigenvalues().cwiseMax(0.0).sum();
    if (total <= 0.0) throw DegenerateData("pca_fit: total variance is zero");

    // ascending -> descending
    Eigen::Index r = 0;
    double cum = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        cum += std::max(es.eigenvalues()(d - 1 - i), 0.0) / total;
        ++r;
        if (cum >= target_ratio - 1e-12) break;
    }
    basis.components.resize(d, r);
    basis.explained_ratio.resize(r);
    for (Eigen::Index i = 0; i < r; ++i) {
        basis.components.col(i) = es.eigenvectors().col(d - 1 - i);
        basis.explained_ratio(i) =
            std::max(es.eigenvalues()(d - 1 - i), 0.0) / total;
    }
    return basis;
}

RegressionBlocks build_regression_blocks(const MatrixXd& effect,
                                         const MatrixXd& cause,
                                         const EmbeddingSpec& spec,
                                         double target_ratio) {
    spec.validate();
    if (effect.rows() != cause.rows())
        throw LengthMismatch("build_regression_blocks: series lengths differ");

    const MatrixXd effect_embed = embed(effect, spec);
    const MatrixXd cause_embed = embed(cause, spec);
    const Eigen::Index n = effect_embed.rows();

    // Present-frame rows of the effect, aligned with the embedding rows:
    // embedding row i corresponds to t = delay + window - 1 + i.
    const MatrixXd effect_present =
        effect.bottomRows(effect.rows() - (spec.delay + spec.window - 1));

    RegressionBlocks out;
    out.basis_y1 = pca_fit(effect_present, target_ratio);
    out.basis_y2 = pca_fit(cause_embed, target_ratio);
    out.basis_x = pca_fit(effect_embed, target_ratio);
    out.dataset.y1 = out.basis_y1.project(effect_present);
    out.dataset.y2 = out.basis_y2.project(cause_embed);
    out.dataset.x = out.basis_x.project(effect_embed);
    if (out.dataset.y1.rows() != n)
        throw LengthMismatch("build_regression_blocks: alignment bug");
    return out;
}

}  // namespace causal::preprocess

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "causal/preprocess.hpp"
#include "causal/rng.hpp"

using causal::Rng;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace preprocess = causal::preprocess;
using preprocess::EmbeddingSpec;

namespace {

/// Ramp series whose entries encode (time, channel) so index bookkeeping is
/// directly checkable: value = 1000 * t + ch.
MatrixXd coded_series(Eigen::Index t, Eigen::Index d) {
    MatrixXd m(t, d);
    for (Eigen::Index i = 0; i < t; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            m(i, j) = 1000.0 * static_cast<double>(i) + static_cast<double>(j);
    return m;
}

MatrixXd random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
    return MatrixXd::NullaryExpr(
        r, c, [&](Eigen::Index, Eigen::Index) { return rng.normal(); });
}

}  // namespace

TEST_CASE("velocity: first differences with one fewer row") {
    const MatrixXd pos = coded_series(5, 2);
    const MatrixXd vel = preprocess::velocity(pos);
    REQUIRE(vel.rows() == 4);
    CHECK(vel(0, 0) == doctest::Approx(1000.0));
    CHECK(vel(3, 1) == doctest::Approx(1000.0));
    CHECK_THROWS_AS(preprocess::velocity(MatrixXd::Zero(1, 3)),
                    causal::TooShort);
}

TEST_CASE("feature: position and velocity side by side, d=21 gives width 42") {
    const MatrixXd pos = coded_series(10, 21);
    const MatrixXd f = preprocess::feature(pos);
    CHECK(f.rows() == 9);
    CHECK(f.cols() == 42);
    // Row i is time i+1: position block is pos.row(i+1).
    CHECK(f(0, 0) == doctest::Approx(pos(1, 0)));
    CHECK(f(0, 21) == doctest::Approx(pos(1, 0) - pos(0, 0)));
}

TEST_CASE("embed: index bookkeeping on a coded series") {
    const EmbeddingSpec spec{2, 1, 3};  // delay 2, stride 1, window 3
    const MatrixXd f = coded_series(10, 2);
    const MatrixXd e = preprocess::embed(f, spec);
    // N = T - d - tau + 1 = 10 - 2 - 3 + 1 = 6; width = f * tau/s = 6.
    REQUIRE(e.rows() == 6);
    REQUIRE(e.cols() == 6);
    // Row 0 corresponds to t = d + tau - 1 = 4 and stacks times t-d-j*s
    // for j = 0,1,2, i.e. frames 2, 1, 0.
    CHECK(e(0, 0) == doctest::Approx(f(2, 0)));
    CHECK(e(0, 2) == doctest::Approx(f(1, 0)));
    CHECK(e(0, 4) == doctest::Approx(f(0, 0)));
    // Last row corresponds to t = 9: frames 7, 6, 5.
    CHECK(e(5, 0) == doctest::Approx(f(7, 0)));
    CHECK(e(5, 5) == doctest::Approx(f(5, 1)));
}

TEST_CASE("embed: strided long-window shape (f=42, d=10, s=5, tau=100)") {
    const EmbeddingSpec spec{10, 5, 100};
    CHECK(spec.frames() == 20);
    const MatrixXd f = MatrixXd::Zero(200, 42);
    const MatrixXd e = preprocess::embed(f, spec);
    CHECK(e.rows() == 200 - 10 - 100 + 1);
    CHECK(e.cols() == 840);
}

TEST_CASE("embed: shift equivariance") {
    Rng rng(2);
    const MatrixXd f = random_matrix(rng, 40, 3);
    const EmbeddingSpec spec{1, 2, 4};
    const MatrixXd full = preprocess::embed(f, spec);
    const MatrixXd shifted = preprocess::embed(f.bottomRows(35), spec);
    // Dropping the first 5 frames drops exactly the first 5 embedding rows.
    CHECK((full.bottomRows(shifted.rows()) - shifted).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0));
}

TEST_CASE("embed/spec validation") {
    CHECK_THROWS_AS((EmbeddingSpec{1, 2, 5}.validate()), causal::DomainError);
    CHECK_THROWS_AS((EmbeddingSpec{-1, 1, 1}.validate()), causal::DomainError);
    CHECK_THROWS_AS(preprocess::embed(MatrixXd::Zero(3, 1), EmbeddingSpec{2, 1, 3}),
                    causal::TooShort);
}

TEST_CASE("pca_fit: recovers a planted low-rank structure (Eckart-Young)") {
    Rng rng(4);
    // Rank-2 data in 6 dims plus tiny noise.
    const MatrixXd basis = random_matrix(rng, 6, 2);
    const MatrixXd coeffs = random_matrix(rng, 500, 2);
    const MatrixXd data =
        coeffs * basis.transpose() + 1e-6 * random_matrix(rng, 500, 6);
    const auto pca = preprocess::pca_fit(data, 0.99);
    CHECK(pca.components.cols() == 2);
    CHECK(pca.explained_ratio.sum() > 0.999);
    // Orthonormal columns.
    const MatrixXd gram = pca.components.transpose() * pca.components;
    CHECK((gram - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
    // Reconstruction error bounded by the discarded variance.
    const MatrixXd proj = pca.project(data);
    const MatrixXd recon =
        (proj * pca.components.transpose()).rowwise() + pca.mean.transpose();
    CHECK((recon - data).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("pca_fit: isotropic data keeps everything at ratio 1") {
    Rng rng(8);
    const MatrixXd data = random_matrix(rng, 400, 3);
    const auto pca = preprocess::pca_fit(data, 1.0);
    CHECK(pca.components.cols() == 3);
    CHECK(pca.explained_ratio.sum() == doctest::Approx(1.0));
    // Descending order.
    for (Eigen::Index i = 1; i < 3; ++i)
        CHECK(pca.explained_ratio(i) <= pca.explained_ratio(i - 1) + 1e-15);
}

TEST_CASE("pca_fit: constant data raises DegenerateData") {
    CHECK_THROWS_AS(preprocess::pca_fit(MatrixXd::Ones(10, 2), 0.9),
                    causal::DegenerateData);
}

TEST_CASE("build_regression_blocks: rows align across the three blocks") {
    Rng rng(6);
    const MatrixXd effect = random_matrix(rng, 60, 2);
    const MatrixXd cause = random_matrix(rng, 60, 2);
    const EmbeddingSpec spec{1, 1, 2};
    const auto blocks =
        preprocess::build_regression_blocks(effect, cause, spec, 1.0);
    const Eigen::Index n = 60 - 1 - 2 + 1;
    CHECK(blocks.dataset.y1.rows() == n);
    CHECK(blocks.dataset.y2.rows() == n);
    CHECK(blocks.dataset.x.rows() == n);
    // With ratio 1 the PCA is a rotation: undoing it recovers the inputs.
    const MatrixXd y1_back =
        (blocks.dataset.y1 * blocks.basis_y1.components.transpose()).rowwise() +
        blocks.basis_y1.mean.transpose();
    CHECK((y1_back - effect.bottomRows(n)).cwiseAbs().maxCoeff() < 1e-10);

    CHECK_THROWS_AS(preprocess::build_regression_blocks(
                        effect, cause.topRows(50), spec, 1.0),
                    causal::LengthMismatch);
}

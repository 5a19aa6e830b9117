#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "causal/model_io.hpp"
#include "causal/rng.hpp"

using causal::Rng;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace io = causal::io;
namespace mppcca = causal::mppcca;

namespace {

mppcca::MppccaModel sample_model(Rng& rng) {
    mppcca::MppccaModel model;
    model.d1 = 2;
    model.d2 = 1;
    model.dt = 1;
    const Eigen::Index d = 3, dx = 2;
    for (int k = 0; k < 2; ++k) {
        mppcca::ComponentParams c;
        c.pi = k == 0 ? 0.25 : 0.75;
        c.mu = VectorXd::NullaryExpr(d, [&](Eigen::Index) { return rng.normal(); });
        c.w_x = MatrixXd::NullaryExpr(
            d, dx, [&](Eigen::Index, Eigen::Index) { return rng.normal(); });
        c.w_t = MatrixXd::NullaryExpr(
            d, 1, [&](Eigen::Index, Eigen::Index) { return rng.normal(); });
        MatrixXd m = MatrixXd::NullaryExpr(
            d, d, [&](Eigen::Index, Eigen::Index) { return rng.normal(); });
        c.psi = m * m.transpose() + MatrixXd::Identity(d, d);
        model.components.push_back(std::move(c));
    }
    return model;
}

}  // namespace

TEST_CASE("model JSON round trip is bit-faithful") {
    Rng rng(17);
    const auto model = sample_model(rng);
    const std::string text = io::model_to_json(model);
    const auto back = io::model_from_json(text);
    CHECK(back.k() == model.k());
    CHECK(back.d1 == model.d1);
    CHECK(back.dt == model.dt);
    for (int k = 0; k < 2; ++k) {
        const auto& a = model.components[static_cast<size_t>(k)];
        const auto& b = back.components[static_cast<size_t>(k)];
        CHECK(a.pi == b.pi);
        CHECK((a.mu - b.mu).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a.w_x - b.w_x).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a.w_t - b.w_t).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a.psi - b.psi).cwiseAbs().maxCoeff() == 0.0);
    }
    // Second serialization is byte-identical.
    CHECK(io::model_to_json(back) == text);
}

TEST_CASE("model JSON rejects malformed documents") {
    CHECK_THROWS_AS(io::model_from_json("not json"), causal::ParseError);
    CHECK_THROWS_AS(io::model_from_json("{\"version\": 99}"),
                    causal::ParseError);
}

TEST_CASE("pca basis JSON round trip") {
    Rng rng(23);
    causal::preprocess::PcaBasis basis;
    basis.mean = VectorXd::NullaryExpr(4, [&](Eigen::Index) { return rng.normal(); });
    basis.components = MatrixXd::NullaryExpr(
        4, 2, [&](Eigen::Index, Eigen::Index) { return rng.normal(); });
    basis.explained_ratio = VectorXd::LinSpaced(2, 0.7, 0.3);
    const auto back = io::pca_basis_from_json(io::pca_basis_to_json(basis));
    CHECK((back.mean - basis.mean).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.components - basis.components).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.explained_ratio - basis.explained_ratio).cwiseAbs().maxCoeff() ==
          0.0);
}

TEST_CASE("gc report CSV marks flagged clusters with nan") {
    causal::clustering::GcReport report;
    report.whole_series_gc = 0.5;
    causal::clustering::GcClusterEntry ok;
    ok.cluster_id = 0;
    ok.n_samples = 100;
    ok.rho1 = 0.9;
    ok.gc_index = 1.2;
    causal::clustering::GcClusterEntry bad;
    bad.cluster_id = 1;
    bad.n_samples = 2;
    bad.flagged = true;
    bad.flag_reason = "too small";
    report.per_cluster = {ok, bad};
    const std::string csv = io::gc_report_to_csv(report);
    CHECK(csv.find("cluster_id,n_samples,rho1,gc_index") == 0);
    CHECK(csv.find("1,2,nan,nan") != std::string::npos);
    const std::string js = io::gc_report_to_json(report);
    CHECK(js.find("\"flag_reason\": \"too small\"") != std::string::npos);
}

TEST_CASE("responsibilities and trace CSV shapes") {
    mppcca::Responsibilities resp;
    resp.r.resize(2, 2);
    resp.r << 0.25, 0.75, 1.0, 0.0;
    const std::string csv = io::responsibilities_to_csv(resp);
    CHECK(csv == "r0,r1\n0.25,0.75\n1,0\n");

    mppcca::FitTrace trace;
    trace.log_likelihood_per_iter = {-10.0, -5.5};
    const std::string tcsv = io::trace_to_csv(trace);
    CHECK(tcsv == "iteration,log_likelihood\n0,-10\n1,-5.5\n");
}

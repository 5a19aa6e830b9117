#include "causal/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace causal::io {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) rows.push_back(m(i, j));
    return rows;  // row-major flat
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows,
                                 Eigen::Index cols) {
    if (static_cast<Eigen::Index>(j.size()) != rows * cols)
        throw ParseError("model JSON: matrix size mismatch");
    Eigen::MatrixXd m(rows, cols);
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index jc = 0; jc < cols; ++jc)
            m(i, jc) = j[idx++].get<double>();
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = j[static_cast<size_t>(i)].get<double>();
    return v;
}

constexpr int kModelVersion = 1;

}  // namespace

std::string model_to_json(const mppcca::MppccaModel& model) {
    json doc;
    doc["version"] = kModelVersion;
    doc["K"] = model.k();
    doc["d1"] = model.d1;
    doc["d2"] = model.d2;
    doc["dx"] = model.components.empty() ? 0 : model.components[0].w_x.cols();
    doc["dt"] = model.dt;
    doc["eta_c"] = model.eta_c;
    doc["eta_wx"] = model.eta_wx;
    json comps = json::array();
    for (const auto& c : model.components) {
        json jc;
        jc["pi"] = c.pi;
        jc["mu"] = vector_to_json(c.mu);
        jc["w_x"] = matrix_to_json(c.w_x);
        jc["w_t"] = matrix_to_json(c.w_t);
        jc["psi"] = matrix_to_json(c.psi);
        comps.push_back(std::move(jc));
    }
    doc["components"] = std::move(comps);
    return doc.dump(2);
}

mppcca::MppccaModel model_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("model JSON: ") + e.what());
    }
    if (doc.value("version", -1) != kModelVersion)
        throw ParseError("model JSON: unsupported version");

    mppcca::MppccaModel model;
    model.d1 = doc.at("d1").get<Eigen::Index>();
    model.d2 = doc.at("d2").get<Eigen::Index>();
    model.dt = doc.at("dt").get<Eigen::Index>();
    model.eta_c = doc.at("eta_c").get<double>();
    model.eta_wx = doc.at("eta_wx").get<double>();
    const Eigen::Index dx = doc.at("dx").get<Eigen::Index>();
    const Eigen::Index d = model.d();
    for (const auto& jc : doc.at("components")) {
        mppcca::ComponentParams c;
        c.pi = jc.at("pi").get<double>();
        c.mu = vector_from_json(jc.at("mu"));
        c.w_x = matrix_from_json(jc.at("w_x"), d, dx);
        c.w_t = matrix_from_json(jc.at("w_t"), d, model.dt);
        c.psi = matrix_from_json(jc.at("psi"), d, d);
        model.components.push_back(std::move(c));
    }
    if (static_cast<Eigen::Index>(model.components.size()) !=
        doc.at("K").get<Eigen::Index>())
        throw ParseError("model JSON: K does not match component count");
    model.validate();
    return model;
}

std::string pca_basis_to_json(const preprocess::PcaBasis& basis) {
    json doc;
    doc["version"] = 1;
    doc["dim"] = basis.components.rows();
    doc["rank"] = basis.components.cols();
    doc["mean"] = vector_to_json(basis.mean);
    doc["components"] = matrix_to_json(basis.components);
    doc["explained_ratio"] = vector_to_json(basis.explained_ratio);
    return doc.dump(2);
}

preprocess::PcaBasis pca_basis_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("pca JSON: ") + e.what());
    }
    preprocess::PcaBasis basis;
    basis.mean = vector_from_json(doc.at("mean"));
    basis.components = matrix_from_json(doc.at("components"),
                                        doc.at("dim").get<Eigen::Index>(),
                                        doc.at("rank").get<Eigen::Index>());
    basis.explained_ratio = vector_from_json(doc.at("explained_ratio"));
    return basis;
}

std::string gc_report_to_json(const clustering::GcReport& report) {
    json doc;
    doc["whole_series_gc"] = report.whole_series_gc;
    doc["whole_series_rho1"] = report.whole_series_rho1;
    json clusters = json::array();
    for (const auto& e : report.per_cluster) {
        json je;
        je["cluster_id"] = e.cluster_id;
        je["n_samples"] = e.n_samples;
        if (e.flagged) {
            je["flagged"] = true;
            je["flag_reason"] = e.flag_reason;
        } else {
            je["rho1"] = e.rho1;
            je["gc_index"] = e.gc_index;
        }
        clusters.push_back(std::move(je));
    }
    doc["per_cluster"] = std::move(clusters);
    return doc.dump(2);
}

std::string gc_report_to_csv(const clustering::GcReport& report) {
    std::ostringstream os;
    os << "cluster_id,n_samples,rho1,gc_index\n";
    char buf[128];
    for (const auto& e : report.per_cluster) {
        if (e.flagged) {
            os << e.cluster_id << ',' << e.n_samples << ",nan,nan\n";
        } else {
            std::snprintf(buf, sizeof buf, "%d,%lld,%.17g,%.17g\n",
                          e.cluster_id, static_cast<long long>(e.n_samples),
                          e.rho1, e.gc_index);
            os << buf;
        }
    }
    return os.str();
}

std::string responsibilities_to_csv(const mppcca::Responsibilities& resp) {
    std::ostringstream os;
    for (Eigen::Index k = 0; k < resp.r.cols(); ++k)
        os << (k ? "," : "") << "r" << k;
    os << '\n';
    char buf[32];
    for (Eigen::Index i = 0; i < resp.r.rows(); ++i) {
        for (Eigen::Index k = 0; k < resp.r.cols(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", resp.r(i, k));
            os << (k ? "," : "") << buf;
        }
        os << '\n';
    }
    return os.str();
}

std::string trace_to_csv(const mppcca::FitTrace& trace) {
    std::ostringstream os;
    os << "iteration,log_likelihood\n";
    char buf[32];
    for (size_t i = 0; i < trace.log_likelihood_per_iter.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g",
                      trace.log_likelihood_per_iter[i]);
        os << i << ',' << buf << '\n';
    }
    return os.str();
}

}  // namespace causal::io

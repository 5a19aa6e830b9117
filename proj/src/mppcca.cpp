#include "causal/mppcca.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "causal/clustering.hpp"
#include "causal/rng.hpp"

namespace causal::mppcca {

namespace {

double mass_floor(Eigen::Index dt) {
    return static_cast<double>(std::max<Eigen::Index>(dt + 1, 2));
}

/// Per-sample log densities: out(n,k) = ln pi_k + ln N(y_n | W_x x_n + mu, C_k).
MatrixXd log_densities(const MppccaModel& model, const RegressionDataset& data,
                       const MatrixXd& y) {
    const Eigen::Index n = data.n();
    const Eigen::Index d = model.d();
    MatrixXd logp(n, model.k());
    for (Eigen::Index k = 0; k < model.k(); ++k) {
        const ComponentParams& c = model.components[static_cast<size_t>(k)];
        const MatrixXd cov = component_covariance(c, model.eta_c);
        Eigen::LLT<MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success)
            throw NumericalError("mppcca: component covariance not PD");
        const MatrixXd l = llt.matrixL();
        const double log_det_half = l.diagonal().array().log().sum();
        const double norm_const =
            -log_det_half - 0.5 * static_cast<double>(d) * std::log(2.0 * M_PI);
        const double log_pi = std::log(std::max(c.pi, 1e-300));

        MatrixXd diff = y - data.x * c.w_x.transpose();
        diff.rowwise() -= c.mu.transpose();
        const MatrixXd z =
            l.triangularView<Eigen::Lower>().solve(diff.transpose());
        logp.col(k) =
            (-0.5 * z.colwise().squaredNorm()).transpose().array() + norm_const +
            log_pi;
    }
    if (!logp.allFinite())
        throw NumericalError("mppcca: NaN in per-sample log density");
    return logp;
}

int env_thread_cap() {
    if (const char* v = std::getenv("CAUSAL_PATTERNS_THREADS")) {
        const int n = std::atoi(v);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

void MppccaModel::validate() const {
    if (components.empty()) throw DomainError("MppccaModel: no components");
    double pi_sum = 0.0;
    for (const auto& c : components) {
        pi_sum += c.pi;
        if (c.mu.size() != d() || c.psi.rows() != d() || c.psi.cols() != d() ||
            c.w_t.rows() != d() || c.w_t.cols() != dt)
            throw DomainError("MppccaModel: component shape mismatch");
    }
    if (std::abs(pi_sum - 1.0) > 1e-10)
        throw DomainError("MppccaModel: mixing weights do not sum to 1");
    if (dt > std::min(d1, d2))
        throw DomainError("MppccaModel: dt exceeds min(d1, d2)");
}

void Responsibilities::validate() const {
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
        if (std::abs(r.row(i).sum() - 1.0) > 1e-10)
            throw DomainError("Responsibilities: row does not sum to 1");
        if (r.row(i).minCoeff() < 0.0 || r.row(i).maxCoeff() > 1.0)
            throw DomainError("Responsibilities: entry outside [0,1]");
    }
}

MatrixXd component_covariance(const ComponentParams& c, double eta_c) {
    MatrixXd cov = c.psi + c.w_t * c.w_t.transpose();
    cov.diagonal().array() += eta_c;
    return 0.5 * (cov + cov.transpose());
}

double log_likelihood(const MppccaModel& model, const RegressionDataset& data) {
    const MatrixXd y = data.stacked_y();
    const MatrixXd logp = log_densities(model, data, y);
    double ll = 0.0;
    for (Eigen::Index i = 0; i < logp.rows(); ++i) {
        const double m = logp.row(i).maxCoeff();
        ll += m + std::log((logp.row(i).array() - m).exp().sum());
    }
    return ll;
}

Responsibilities e_step(const MppccaModel& model, const RegressionDataset& data) {
    const MatrixXd y = data.stacked_y();
    MatrixXd logp = log_densities(model, data, y);
    Responsibilities resp;
    resp.r.resize(logp.rows(), logp.cols());
    for (Eigen::Index i = 0; i < logp.rows(); ++i) {
        const double m = logp.row(i).maxCoeff();
        const Eigen::ArrayXd e = (logp.row(i).array() - m).exp();
        resp.r.row(i) = (e / e.sum()).matrix();
    }
    return resp;
}

MppccaModel m_step(const RegressionDataset& data, const Responsibilities& resp,
                   const MppccaModel& prev) {
    const Eigen::Index n = data.n();
    const Eigen::Index dx = data.x.cols();
    const Eigen::Index d = prev.d();
    const Eigen::Index dt = prev.dt;
    const MatrixXd y = data.stacked_y();

    MppccaModel model = prev;
    for (Eigen::Index k = 0; k < prev.k(); ++k) {
        const Eigen::VectorXd r = resp.r.col(k);
        const double mass = r.sum();
        if (mass < mass_floor(dt))
            throw EmptyClusterError("m_step: component " + std::to_string(k) +
                                    " has effective mass " + std::to_string(mass));

        const Eigen::RowVectorXd ybar = (r.transpose() * y) / mass;
        const Eigen::RowVectorXd xbar =
            dx > 0 ? Eigen::RowVectorXd((r.transpose() * data.x) / mass)
                   : Eigen::RowVectorXd(0);

        const MatrixXd yt = y.rowwise() - ybar;
        const MatrixXd xt = dx > 0 ? MatrixXd(data.x.rowwise() - xbar)
                                   : MatrixXd(n, 0);

        ComponentParams& c = model.components[static_cast<size_t>(k)];
        c.pi = mass / static_cast<double>(n);

        // Ridge-regularized responsibility-weighted normal equations.
        if (dx > 0) {
            const MatrixXd rxt = r.asDiagonal() * xt;
            MatrixXd gram = xt.transpose() * rxt;
            gram.diagonal().array() += prev.eta_wx;
            Eigen::LDLT<MatrixXd> ldlt(gram);
            c.w_x = ldlt.solve(rxt.transpose() * yt).transpose();
        } else {
            c.w_x = MatrixXd(d, 0);
        }

        // Mean from the W_x residuals (uses the new W_x).
        const MatrixXd pred = dx > 0 ? MatrixXd(data.x * c.w_x.transpose())
                                     : MatrixXd::Zero(n, d);
        c.mu = ((r.transpose() * (y - pred)) / mass).transpose();

        // Weighted residual covariance.
        const MatrixXd res = yt - (dx > 0 ? MatrixXd(xt * c.w_x.transpose())
                                          : MatrixXd::Zero(n, d));
        MatrixXd s = (res.transpose() * (r.asDiagonal() * res)) / mass;
        s = 0.5 * (s + s.transpose());

        // W_t from the top-dt eigenpairs of S, discounting the previous Psi
        // along those directions; R fixed to the identity.
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(s);
        if (es.info() != Eigen::Success)
            throw NumericalError("m_step: eigendecomposition of S failed");
        c.w_t.resize(d, dt);
        for (Eigen::Index j = 0; j < dt; ++j) {
            const Eigen::Index src = d - 1 - j;  // descending
            const Eigen::VectorXd u = es.eigenvectors().col(src);
            const double lam = es.eigenvalues()(src);
            const double disc = u.dot(prev.components[static_cast<size_t>(k)].psi * u);
            c.w_t.col(j) = u * std::sqrt(std::max(lam - disc, 0.0));
        }

        // Psi = S - W_t W_t^T, projected to symmetric PSD with a floor.
        MatrixXd psi = s - c.w_t * c.w_t.transpose();
        psi = 0.5 * (psi + psi.transpose());
        const double floor =
            1e-6 * std::max(s.trace(), 0.0) / static_cast<double>(d);
        Eigen::SelfAdjointEigenSolver<MatrixXd> pes(psi);
        psi = pes.eigenvectors() *
              pes.eigenvalues().cwiseMax(floor).asDiagonal() *
              pes.eigenvectors().transpose();
        c.psi = 0.5 * (psi + psi.transpose());
    }
    return model;
}

MppccaModel init_from_labels(const RegressionDataset& data,
                             const std::vector<int>& labels, int k, int dt,
                             const FitConfig& config) {
    const Eigen::Index n = data.n();
    const Eigen::Index d = data.y1.cols() + data.y2.cols();

    MppccaModel seed_model;
    seed_model.d1 = data.y1.cols();
    seed_model.d2 = data.y2.cols();
    seed_model.dt = dt;
    seed_model.eta_c = config.eta_c;
    seed_model.eta_wx = config.eta_wx;
    seed_model.components.resize(static_cast<size_t>(k));
    for (auto& c : seed_model.components) {
        c.pi = 1.0 / static_cast<double>(k);
        c.mu = VectorXd::Zero(d);
        c.w_x = MatrixXd::Zero(d, data.x.cols());
        c.w_t = MatrixXd::Zero(d, dt);
        c.psi = MatrixXd::Identity(d, d);
    }

    Responsibilities resp;
    resp.r = MatrixXd::Zero(n, k);
    for (Eigen::Index i = 0; i < n; ++i)
        resp.r(i, labels[static_cast<size_t>(i)]) = 1.0;

    return m_step(data, resp, seed_model);
}

namespace {

struct RestartOutcome {
    MppccaModel model;
    Responsibilities resp;
    FitTrace trace;
    double final_ll = -std::numeric_limits<double>::infinity();
    bool ok = false;
};

std::vector<int> block_labels(Eigen::Index n, int k) {
    std::vector<int> labels(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        labels[static_cast<size_t>(i)] =
            std::min<int>(static_cast<int>(i * k / n), k - 1);
    return labels;
}

RestartOutcome run_restart(const RegressionDataset& data, int k, int dt,
                           const FitConfig& config, std::uint64_t restart_seed,
                           bool use_blocks) {
    RestartOutcome out;
    Rng rng(restart_seed);

    for (int attempt = 0; attempt <= config.reinit_retries; ++attempt) {
        try {
            std::vector<int> labels;
            if (use_blocks && attempt == 0) {
                labels = block_labels(data.n(), k);
            } else {
                MatrixXd joint(data.n(), data.x.cols() + data.y1.cols() + data.y2.cols());
                joint << data.x, data.y1, data.y2;
                labels = clustering::kmeans(joint, k, rng.derive_seed()).labels;
            }
            MppccaModel model = init_from_labels(data, labels, k, dt, config);

            FitTrace trace;
            trace.seed = restart_seed;
            double ll_prev = -std::numeric_limits<double>::infinity();
            Responsibilities resp;
            for (int it = 0; it < config.max_iters; ++it) {
                resp = e_step(model, data);
                const double ll = log_likelihood(model, data);
                trace.log_likelihood_per_iter.push_back(ll);
                trace.n_iters = it + 1;
                if (it > 0 && ll + 1e-8 * std::abs(ll) < ll_prev)
                    trace.monotonicity_violations.push_back(it);
                if (it > 0 && std::abs(ll - ll_prev) < config.tol * std::abs(ll)) {
                    trace.converged = true;
                    break;
                }
                ll_prev = ll;
                MppccaModel next = m_step(data, resp, model);
                if (config.enforce_block_diagonal) {
                    for (auto& c : next.components) {
                        c.psi.topRightCorner(next.d1, next.d2).setZero();
                        c.psi.bottomLeftCorner(next.d2, next.d1).setZero();
                    }
                }
                model = std::move(next);
            }
            out.model = std::move(model);
            out.resp = std::move(resp);
            out.trace = std::move(trace);
            out.final_ll = out.trace.log_likelihood_per_iter.back();
            out.ok = true;
            return out;
        } catch (const EmptyClusterError&) {
            if (attempt == config.reinit_retries) throw;
        }
    }
    return out;
}

}  // namespace

FitResult fit(const RegressionDataset& data, int k, int dt,
              const FitConfig& config) {
    data.validate();
    if (k < 1) throw DomainError("fit: k must be >= 1");
    if (dt > std::min(data.y1.cols(), data.y2.cols()))
        throw DomainError("fit: dt exceeds min(d1, d2)");

    Rng seeder(config.seed);
    std::vector<std::uint64_t> seeds(static_cast<size_t>(std::max(config.restarts, 1)));
    for (auto& s : seeds) s = seeder.derive_seed();

    std::vector<RestartOutcome> outcomes(seeds.size());
    const int threads =
        std::min<int>(env_thread_cap(), static_cast<int>(seeds.size()));

    std::vector<std::exception_ptr> errors(seeds.size());
    if (threads <= 1) {
        for (size_t i = 0; i < seeds.size(); ++i) {
            try {
                outcomes[i] = run_restart(data, k, dt, config, seeds[i],
                                          config.temporal_block_restart && i == 0);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < seeds.size();
                     i = next.fetch_add(1)) {
                    try {
                        outcomes[i] = run_restart(data, k, dt, config, seeds[i],
                                                  config.temporal_block_restart && i == 0);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    const RestartOutcome* best = nullptr;
    for (const auto& o : outcomes)
        if (o.ok && (!best || o.final_ll > best->final_ll)) best = &o;
    if (!best) {
        // Surface a restart failure only when every restart failed.
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
        throw EmptyClusterError("fit: every restart lost a component");
    }

    FitResult result;
    result.model = best->model;
    result.resp = best->resp;
    result.trace = best->trace;
    return result;
}

}  // namespace causal::mppcca

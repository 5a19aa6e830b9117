// Command-line pipeline: generate synthetic series, preprocess recordings,
// fit the mixture model, and report clusterwise Granger causality.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "causal/clustering.hpp"
#include "causal/model_io.hpp"
#include "causal/mppcca.hpp"
#include "causal/pipeline.hpp"
#include "causal/preprocess.hpp"
#include "causal/synthgen.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNoConvergence = 3;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << content;
    if (!os) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct FitFlags {
    int k = 3;
    int dt = 1;
    double eta_c = 1e-6;
    double eta_wx = 1e-6;
    double tol = 1e-6;
    int max_iters = 200;
    int restarts = 10;
    std::uint64_t seed = 0;
    bool enforce_block_diagonal = false;
    bool no_block_restart = false;

    causal::mppcca::FitConfig to_config() const {
        causal::mppcca::FitConfig cfg;
        cfg.eta_c = eta_c;
        cfg.eta_wx = eta_wx;
        cfg.tol = tol;
        cfg.max_iters = max_iters;
        cfg.restarts = restarts;
        cfg.seed = seed;
        cfg.enforce_block_diagonal = enforce_block_diagonal;
        cfg.temporal_block_restart = !no_block_restart;
        return cfg;
    }
};

void add_fit_flags(CLI::App* cmd, FitFlags& f) {
    cmd->add_option("--k", f.k, "Number of mixture components");
    cmd->add_option("--dt", f.dt, "Latent factor dimension");
    cmd->add_option("--eta-c", f.eta_c, "Ridge added to component covariances");
    cmd->add_option("--eta-wx", f.eta_wx, "Ridge for the regression solve");
    cmd->add_option("--tol", f.tol, "Relative log-likelihood tolerance");
    cmd->add_option("--max-iters", f.max_iters, "EM iteration cap");
    cmd->add_option("--restarts", f.restarts, "Independent EM restarts");
    cmd->add_option("--seed", f.seed, "Fit RNG seed");
    cmd->add_flag("--enforce-block-diagonal", f.enforce_block_diagonal,
                  "Zero the cross-block noise covariance after each M-step");
    cmd->add_flag("--no-block-restart", f.no_block_restart,
                  "Disable the temporal-blocks initialization of restart 0");
}

int cmd_generate(const std::string& experiment, std::uint64_t seed,
                 const std::string& out_path) {
    causal::synthgen::LabeledSeries series;
    if (experiment == "exp1") {
        series = causal::synthgen::gen_exp1(
            causal::synthgen::default_exp1_params(), seed);
    } else if (experiment == "exp2") {
        series = causal::synthgen::gen_exp2(
            causal::synthgen::default_exp2_params(), seed);
    } else {
        std::cerr << "unknown experiment '" << experiment
                  << "' (expected exp1 or exp2)\n";
        return kExitUsage;
    }
    write_file(out_path, causal::synthgen::to_csv(series));

    std::cout << "T=" << series.x.size() << " segments:";
    int prev = -1;
    for (size_t t = 0; t < series.truth.size(); ++t) {
        if (series.truth[t] != prev) {
            std::cout << ' ' << t << ":label" << series.truth[t];
            prev = series.truth[t];
        }
    }
    std::cout << '\n';
    return 0;
}

int cmd_fit(const std::string& input, const FitFlags& flags,
            const std::string& model_path, const std::string& resp_path,
            const std::string& trace_path) {
    const auto series = causal::synthgen::from_csv(read_file(input));
    const auto blocks = causal::pipeline::blocks_from_series(series);

    const auto result = causal::mppcca::fit(blocks.dataset, flags.k, flags.dt,
                                            flags.to_config());
    write_file(model_path, causal::io::model_to_json(result.model));
    write_file(resp_path, causal::io::responsibilities_to_csv(result.resp));
    write_file(trace_path, causal::io::trace_to_csv(result.trace));

    std::cout << "iterations=" << result.trace.n_iters
              << " converged=" << (result.trace.converged ? "yes" : "no")
              << " log_likelihood="
              << fmt17(result.trace.log_likelihood_per_iter.back()) << '\n';
    return result.trace.converged ? 0 : kExitNoConvergence;
}

int cmd_eval(const std::string& input, const std::string& model_path,
             std::uint64_t kmeans_seed, double ridge,
             const std::string& report_path, const std::string& tidy_path) {
    const auto series = causal::synthgen::from_csv(read_file(input));
    const auto blocks = causal::pipeline::blocks_from_series(series);
    const auto model = causal::io::model_from_json(read_file(model_path));

    const auto resp = causal::mppcca::e_step(model, blocks.dataset);
    const auto assignment = causal::clustering::hard_assign(resp.r);

    causal::clustering::ClusterAssignment truth;
    truth.labels = blocks.truth;
    truth.k = 1 + *std::max_element(blocks.truth.begin(), blocks.truth.end());

    const double misalloc =
        causal::clustering::misallocation_rate(assignment, truth);

    // k-means baseline on the raw joint vectors {x_{t-1}, y_{t-1}, y_t}.
    Eigen::MatrixXd joint(blocks.dataset.n(), 3);
    joint << blocks.dataset.y2, blocks.dataset.x, blocks.dataset.y1;
    const auto km = causal::clustering::kmeans(
        joint, static_cast<int>(model.k()), kmeans_seed);
    const double km_misalloc = causal::clustering::misallocation_rate(km, truth);

    const auto report =
        causal::clustering::clusterwise_gc(blocks.dataset, assignment, ridge);

    std::ostringstream doc;
    doc << "{\n  \"misallocation_mppcca\": " << fmt17(misalloc)
        << ",\n  \"misallocation_kmeans\": " << fmt17(km_misalloc)
        << ",\n  \"report\": " << causal::io::gc_report_to_json(report)
        << "\n}\n";
    write_file(report_path, doc.str());

    if (!tidy_path.empty()) {
        std::ostringstream tidy;
        tidy << "index,x,y,truth,estimated\n";
        const size_t offset = series.x.size() - assignment.labels.size();
        for (size_t i = 0; i < assignment.labels.size(); ++i) {
            const size_t t = offset + i;
            tidy << t << ',' << fmt17(series.x[t]) << ',' << fmt17(series.y[t])
                 << ',' << blocks.truth[i] << ',' << assignment.labels[i]
                 << '\n';
        }
        write_file(tidy_path, tidy.str());
    }

    std::cout << "misallocation=" << fmt17(misalloc)
              << " kmeans_misallocation=" << fmt17(km_misalloc)
              << " whole_gc=" << fmt17(report.whole_series_gc) << '\n';
    return 0;
}

int cmd_gc(const std::string& input, bool use_truth, double ridge,
           const std::string& out_json, const std::string& out_csv) {
    const auto series = causal::synthgen::from_csv(read_file(input));
    const auto blocks = causal::pipeline::blocks_from_series(series);

    causal::clustering::ClusterAssignment assignment;
    if (use_truth) {
        assignment.labels = blocks.truth;
        assignment.k =
            1 + *std::max_element(blocks.truth.begin(), blocks.truth.end());
    } else {
        assignment.labels.assign(static_cast<size_t>(blocks.dataset.n()), 0);
        assignment.k = 1;
    }
    const auto report =
        causal::clustering::clusterwise_gc(blocks.dataset, assignment, ridge);
    if (!out_json.empty())
        write_file(out_json, causal::io::gc_report_to_json(report));
    if (!out_csv.empty())
        write_file(out_csv, causal::io::gc_report_to_csv(report));

    std::cout << "whole_gc=" << fmt17(report.whole_series_gc);
    for (const auto& e : report.per_cluster)
        std::cout << " cluster" << e.cluster_id << "="
                  << (e.flagged ? "flagged" : fmt17(e.gc_index));
    std::cout << '\n';
    return 0;
}

int cmd_preprocess(const std::string& input, const std::string& effect_col,
                   const std::string& cause_col,
                   const causal::preprocess::EmbeddingSpec& spec,
                   double pca_ratio, bool with_velocity,
                   const std::string& out_blocks,
                   const std::string& out_basis_prefix) {
    // Generic multichannel CSV: header names channels; columns whose name
    // starts with the given prefix form each series.
    const std::string text = read_file(input);
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw causal::ParseError("empty CSV");
    std::vector<std::string> names;
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) names.push_back(cell);
    }
    std::vector<int> effect_idx, cause_idx;
    for (size_t i = 0; i < names.size(); ++i) {
        if (names[i].rfind(effect_col, 0) == 0) effect_idx.push_back(static_cast<int>(i));
        if (names[i].rfind(cause_col, 0) == 0) cause_idx.push_back(static_cast<int>(i));
    }
    if (effect_idx.empty() || cause_idx.empty())
        throw causal::ParseError("no columns match the effect/cause prefixes");

    std::vector<std::vector<double>> rows;
    long lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            if (cell.empty())
                throw causal::ParseError("missing value at line " +
                                         std::to_string(lineno));
            size_t pos = 0;
            row.push_back(std::stod(cell, &pos));
            if (pos != cell.size())
                throw causal::ParseError("bad number at line " +
                                         std::to_string(lineno));
        }
        if (row.size() != names.size())
            throw causal::ParseError("wrong column count at line " +
                                     std::to_string(lineno));
        rows.push_back(std::move(row));
    }

    const Eigen::Index t = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd effect(t, static_cast<Eigen::Index>(effect_idx.size()));
    Eigen::MatrixXd cause(t, static_cast<Eigen::Index>(cause_idx.size()));
    for (Eigen::Index i = 0; i < t; ++i) {
        for (size_t j = 0; j < effect_idx.size(); ++j)
            effect(i, static_cast<Eigen::Index>(j)) =
                rows[static_cast<size_t>(i)][static_cast<size_t>(effect_idx[j])];
        for (size_t j = 0; j < cause_idx.size(); ++j)
            cause(i, static_cast<Eigen::Index>(j)) =
                rows[static_cast<size_t>(i)][static_cast<size_t>(cause_idx[j])];
    }
    if (with_velocity) {
        effect = causal::preprocess::feature(effect);
        cause = causal::preprocess::feature(cause);
    }

    const auto blocks =
        causal::preprocess::build_regression_blocks(effect, cause, spec, pca_ratio);

    std::ostringstream os;
    const auto& ds = blocks.dataset;
    for (Eigen::Index j = 0; j < ds.y1.cols(); ++j) os << "y1_" << j << ',';
    for (Eigen::Index j = 0; j < ds.y2.cols(); ++j) os << "y2_" << j << ',';
    for (Eigen::Index j = 0; j < ds.x.cols(); ++j)
        os << "x_" << j << (j + 1 < ds.x.cols() ? "," : "");
    os << '\n';
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        for (Eigen::Index j = 0; j < ds.y1.cols(); ++j)
            os << fmt17(ds.y1(i, j)) << ',';
        for (Eigen::Index j = 0; j < ds.y2.cols(); ++j)
            os << fmt17(ds.y2(i, j)) << ',';
        for (Eigen::Index j = 0; j < ds.x.cols(); ++j)
            os << fmt17(ds.x(i, j)) << (j + 1 < ds.x.cols() ? "," : "");
        os << '\n';
    }
    write_file(out_blocks, os.str());
    if (!out_basis_prefix.empty()) {
        write_file(out_basis_prefix + "_y1.json",
                   causal::io::pca_basis_to_json(blocks.basis_y1));
        write_file(out_basis_prefix + "_y2.json",
                   causal::io::pca_basis_to_json(blocks.basis_y2));
        write_file(out_basis_prefix + "_x.json",
                   causal::io::pca_basis_to_json(blocks.basis_x));
    }
    std::cout << "N=" << ds.n() << " d1=" << ds.y1.cols()
              << " d2=" << ds.y2.cols() << " dx=" << ds.x.cols() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal-pattern extraction from paired time series"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read defaults from a TOML/INI config file");
    app.allow_config_extras(CLI::config_extras_mode::ignore_all);

    // generate
    auto* gen = app.add_subcommand("generate", "Generate a synthetic series");
    std::string experiment;
    std::uint64_t gen_seed = 0;
    std::string gen_out = "series.csv";
    gen->add_option("experiment", experiment, "exp1 or exp2")->required();
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--out", gen_out, "Output CSV path");

    // preprocess
    auto* pre = app.add_subcommand("preprocess",
                                   "Build PCA-reduced regression blocks");
    std::string pre_in, pre_out = "blocks.csv", pre_basis;
    std::string effect_col = "y", cause_col = "x";
    causal::preprocess::EmbeddingSpec spec{1, 1, 1};
    double pca_ratio = 0.9;
    bool with_velocity = false;
    pre->add_option("--input", pre_in, "Input CSV (header names channels)")->required();
    pre->add_option("--effect", effect_col, "Effect-series column prefix");
    pre->add_option("--cause", cause_col, "Cause-series column prefix");
    pre->add_option("--delay", spec.delay, "Embedding delay d");
    pre->add_option("--stride", spec.stride, "Embedding stride s");
    pre->add_option("--window", spec.window, "Embedding window tau");
    pre->add_option("--pca-ratio", pca_ratio, "Cumulative contribution target");
    pre->add_flag("--with-velocity", with_velocity,
                  "Augment channels with first differences");
    pre->add_option("--out", pre_out, "Output blocks CSV");
    pre->add_option("--basis-prefix", pre_basis, "Write PCA bases as JSON");

    // fit
    auto* fitc = app.add_subcommand("fit", "Fit the mixture model");
    std::string fit_in, model_out = "model.json", resp_out = "resp.csv",
                trace_out = "trace.csv";
    FitFlags flags;
    fitc->add_option("--input", fit_in, "Series CSV from `generate`")->required();
    add_fit_flags(fitc, flags);
    fitc->add_option("--out-model", model_out, "Model JSON path");
    fitc->add_option("--out-resp", resp_out, "Responsibilities CSV path");
    fitc->add_option("--out-trace", trace_out, "Log-likelihood trace CSV path");

    // eval
    auto* evalc = app.add_subcommand("eval", "Evaluate a fitted model");
    std::string eval_in, eval_model, report_out = "report.json", tidy_out;
    std::uint64_t kmeans_seed = 0;
    double ridge = 1e-8;
    evalc->add_option("--input", eval_in, "Series CSV")->required();
    evalc->add_option("--model", eval_model, "Model JSON")->required();
    evalc->add_option("--kmeans-seed", kmeans_seed, "Baseline k-means seed");
    evalc->add_option("--ridge", ridge, "Ridge for covariance inversions");
    evalc->add_option("--out-report", report_out, "Report JSON path");
    evalc->add_option("--out-tidy", tidy_out, "Plot-ready CSV path");

    // gc
    auto* gcc = app.add_subcommand("gc", "Granger causality report");
    std::string gc_in, gc_json, gc_csv;
    bool use_truth = false;
    gcc->add_option("--input", gc_in, "Series CSV")->required();
    gcc->add_flag("--use-truth", use_truth, "Per-cluster GC by truth labels");
    gcc->add_option("--ridge", ridge, "Ridge for covariance inversions");
    gcc->add_option("--out-json", gc_json, "Report JSON path");
    gcc->add_option("--out-csv", gc_csv, "Report CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_generate(experiment, gen_seed, gen_out);
        if (pre->parsed())
            return cmd_preprocess(pre_in, effect_col, cause_col, spec,
                                  pca_ratio, with_velocity, pre_out, pre_basis);
        if (fitc->parsed())
            return cmd_fit(fit_in, flags, model_out, resp_out, trace_out);
        if (evalc->parsed())
            return cmd_eval(eval_in, eval_model, kmeans_seed, ridge, report_out,
                            tidy_out);
        if (gcc->parsed()) return cmd_gc(gc_in, use_truth, ridge, gc_json, gc_csv);
    } catch (const causal::ParseError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const causal::LengthMismatch& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const causal::DomainError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

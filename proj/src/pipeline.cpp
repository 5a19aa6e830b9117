#include "causal/pipeline.hpp"

namespace causal::pipeline {

SeriesBlocks blocks_from_series(const synthgen::LabeledSeries& series,
                                const preprocess::EmbeddingSpec& spec,
                                double target_ratio) {
    const Eigen::Index t = static_cast<Eigen::Index>(series.x.size());
    Eigen::MatrixXd effect(t, 1), cause(t, 1);
    for (Eigen::Index i = 0; i < t; ++i) {
        effect(i, 0) = series.y[static_cast<size_t>(i)];
        cause(i, 0) = series.x[static_cast<size_t>(i)];
    }
    auto blocks =
        preprocess::build_regression_blocks(effect, cause, spec, target_ratio);

    SeriesBlocks out;
    out.dataset = std::move(blocks.dataset);
    const Eigen::Index offset = spec.delay + spec.window - 1;
    out.truth.reserve(static_cast<size_t>(out.dataset.n()));
    for (Eigen::Index i = 0; i < out.dataset.n(); ++i)
        out.truth.push_back(series.truth[static_cast<size_t>(offset + i)]);
    return out;
}

}  // namespace causal::pipeline

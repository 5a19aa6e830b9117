#ifndef CAUSAL_PIPELINE_HPP
#define CAUSAL_PIPELINE_HPP

#include <vector>

#include "causal/clustering.hpp"
#include "causal/preprocess.hpp"
#include "causal/synthgen.hpp"

namespace causal::pipeline {

struct SeriesBlocks {
    pcca::RegressionDataset dataset;
    std::vector<int> truth;  // aligned with dataset rows
};

/// Regression blocks {y_t, x_{t-1}, y_{t-1}} for a generated scalar series
/// (y = effect, x = cause), with ground-truth labels aligned to the rows.
SeriesBlocks blocks_from_series(const synthgen::LabeledSeries& series,
                                const preprocess::EmbeddingSpec& spec = {1, 1, 1},
                                double target_ratio = 1.0);

}  // namespace causal::pipeline

#endif

#ifndef CAUSAL_MODEL_IO_HPP
#define CAUSAL_MODEL_IO_HPP

#include <string>

#include "causal/clustering.hpp"
#include "causal/mppcca.hpp"
#include "causal/preprocess.hpp"

namespace causal::io {

/// Versioned JSON document; round-trips finite doubles exactly.
std::string model_to_json(const mppcca::MppccaModel& model);
mppcca::MppccaModel model_from_json(const std::string& text);

std::string pca_basis_to_json(const preprocess::PcaBasis& basis);
preprocess::PcaBasis pca_basis_from_json(const std::string& text);

std::string gc_report_to_json(const clustering::GcReport& report);
/// Flat CSV: cluster_id,n_samples,rho1,gc_index (flagged clusters keep NaN).
std::string gc_report_to_csv(const clustering::GcReport& report);

std::string responsibilities_to_csv(const mppcca::Responsibilities& resp);
std::string trace_to_csv(const mppcca::FitTrace& trace);

}  // namespace causal::io

#endif

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wgp/diagnostics.hpp"
#include "wgp/gp.hpp"
#include "wgp/simulation.hpp"

namespace wgp {

/// Long-format sample ingestion: header `obs_id,value`, one row per sample
/// point. Observations keep the order of first appearance; ids are matched
/// as exact strings. Malformed rows raise invalid_input naming file and row.
std::vector<std::pair<std::string, EmpiricalDistribution>> read_samples_csv(
    const std::string& path);

/// Long-format density ingestion: header `obs_id,x,f` with equispaced x per
/// observation.
std::vector<std::pair<std::string, GridDensity>> read_densities_csv(
    const std::string& path);

/// Target ingestion: header `obs_id,y`, one row per observation.
std::vector<std::pair<std::string, double>> read_targets_csv(
    const std::string& path);

std::string kernel_spec_to_json(const KernelSpec& spec);
KernelSpec kernel_spec_from_json(const std::string& text);

/// Serializes a fitted model: kernel spec, training quantile grids (and
/// features for projection kernels), alpha, offset, jitter and the attained
/// likelihood. The Cholesky factor is omitted.
std::string model_to_json(const GPModel& model);

/// Rebuilds the model: the covariance matrix is recomputed and factorized
/// with the stored jitter, and the stored log-likelihood is verified within
/// 1e-8 (numeric_error on disagreement).
GPModel model_from_json(const std::string& text);

void save_model(const GPModel& model, const std::string& path);
GPModel load_model(const std::string& path);

std::string report_to_json(const BenchmarkReport& report);
std::string diag_report_to_json(const DiagReport& report);

/// Aligned human-readable table of benchmark rows.
std::string format_report_table(const BenchmarkReport& report);

/// Predicted-vs-true pairs as CSV `obs_index,model,truth,pred,sd` (sd blank
/// for rows without variance), 12 significant digits.
std::string report_pairs_csv(const BenchmarkReport& report);

/// Fixed 12-significant-digit formatting used on every numeric CLI surface.
std::string format_sig(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace wgp

#pragma once

#include "mvrec/evaluate.hpp"
#include "mvrec/simulate.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mvrec::report {

/**
 * Rendered output files keyed by file name. Every table is long-format CSV
 * with a fixed header; undefined cells are empty fields. Numbers use a fixed
 * number of decimals so identical inputs give identical bytes.
 *
 * Study files:
 *   summary_relrmse_base.csv   scenario,model,estimator,horizon,mean_relrmse,negative
 *   summary_relrmse_uni.csv    (same columns)
 *   summary_pct_nonneg_base.csv scenario,model,estimator,pct_nonnegative,defined_cells
 *   summary_pct_nonneg_uni.csv (same columns)
 *   summary_rmsse.csv          scenario,model,method,horizon,mean_rmsse,best
 *   relrmse_series.csv         scenario,model,estimator,kind,node,variable,horizon,relrmse,negative
 *   summary.md
 *
 * Evaluate files:
 *   relrmse_base.csv, relrmse_uni.csv  model,estimator,variable,series,horizon,relrmse,negative
 *   summary_evaluate.csv       model,estimator,kind,horizon,mean_relrmse,pct_nonnegative
 *   evaluate.md
 */
using Files = std::map<std::string, std::string>;

inline constexpr int kCsvDecimals = 10;

/// RelRMSE^Base (multi vs base) or RelRMSE^Uni (multi vs uni) for one estimator.
MetricTable relrmse_base(const ErrorCube& cube, const std::string& estimator);
MetricTable relrmse_uni(const ErrorCube& cube, const std::string& estimator);

/// Estimator tags present in a cube ("shrinkage", "sample", ...), in sorted order.
std::vector<std::string> estimators_in(const ErrorCube& cube);

Files study_files(const StudyResult& result);

/// Squared errors per completed replicate, one file per (model, method):
/// errors_<model>_<method>.csv with columns replicate,h<h>:<node>:<variable>...
Files error_files(const StudyResult& result);
Files evaluate_files(const std::map<std::string, CvResult>& by_model);

/// Writes each file under `dir`, creating it when needed.
void write_files(const std::filesystem::path& dir, const Files& files);

}  // namespace mvrec::report

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dsod/metrics.hpp"

namespace dsod {

struct ImageMetrics {
  std::string id;
  double mae = 0.0;
  double f_beta = 0.0;      // adaptive threshold
  double f_beta_max = 0.0;
  double bde = 0.0;         // NaN when either boundary set is empty
  double b_mu = 0.0;
};

struct EvaluationReport {
  std::vector<ImageMetrics> rows;
  ImageMetrics mean;                    // id "__mean__"; BDE over finite rows only
  PrCurve mean_pr;                      // precision/recall averaged over images
  std::vector<std::string> unmatched;   // stems present on one side only
};

inline constexpr const char* kMeanRowId = "__mean__";

/// Metrics of one prediction. The prediction is resized (bilinear) to the
/// ground truth's dims when they differ.
ImageMetrics evaluate_pair(const std::string& id, const SaliencyMap& pred, const BinaryMask& gt,
                           PrCurve* curve = nullptr);

/// Aggregates rows and curves into a report (rows keep their order).
EvaluationReport summarize(std::vector<ImageMetrics> rows, const std::vector<PrCurve>& curves);

/// Matches PNG stems of `pred_dir` and `gt_dir` (either directory may hold
/// the PNGs directly or in a masks/ subdirectory). Unmatched stems are
/// listed in the report, not treated as errors.
EvaluationReport evaluate_directory(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir);

/// Header `id,mae,f_beta,f_beta_max,bde,b_mu`, one row per image, then the
/// mean row.
void write_metrics_csv(const std::filesystem::path& path, const EvaluationReport& report);
/// One JSON object per line, same fields as the CSV.
void write_metrics_jsonl(const std::filesystem::path& path, const EvaluationReport& report);
/// Header `threshold,precision,recall` and 256 rows.
void write_pr_csv(const std::filesystem::path& path, const EvaluationReport& report);

/// Shortest round-trip decimal form ("nan" for NaN).
std::string format_number(double v);

}  // namespace dsod

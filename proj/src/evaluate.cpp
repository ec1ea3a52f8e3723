#include "dsod/evaluate.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "dsod/dataset.hpp"
#include "dsod/png_io.hpp"

namespace dsod {
namespace {

std::filesystem::path png_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError(IoErrorCode::kNotFound, "directory '" + dir.string() + "' does not exist");
  }
  const auto masks = dir / "masks";
  if (std::filesystem::is_directory(masks) && png_stems(dir).empty()) return masks;
  return dir;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError(IoErrorCode::kWriteFailed, "cannot write '" + path.string() + "'");
  return os;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

ImageMetrics evaluate_pair(const std::string& id, const SaliencyMap& pred_in, const BinaryMask& gt,
                           PrCurve* curve) {
  const SaliencyMap pred = pred_in.same_shape(gt) ? pred_in : resize_bilinear(pred_in, gt.height(), gt.width());
  ImageMetrics m;
  m.id = id;
  m.mae = mae(pred, gt);
  m.f_beta = f_beta(pred, gt, FMode::kAdaptive);
  const PrCurve pr = pr_curve(pred, gt);
  m.f_beta_max = 0.0;
  for (int i = 0; i < kPrLevels; ++i) m.f_beta_max = std::max(m.f_beta_max, f_score(pr.precision[i], pr.recall[i]));
  try {
    m.bde = bde(pred, gt);
  } catch (const std::invalid_argument&) {
    m.bde = std::numeric_limits<double>::quiet_NaN();
  }
  m.b_mu = b_mu(pred, gt);
  if (curve) *curve = pr;
  return m;
}

EvaluationReport summarize(std::vector<ImageMetrics> rows, const std::vector<PrCurve>& curves) {
  EvaluationReport r;
  r.rows = std::move(rows);
  r.mean.id = kMeanRowId;
  const double n = static_cast<double>(r.rows.size());
  std::size_t bde_n = 0;
  for (const auto& m : r.rows) {
    r.mean.mae += m.mae;
    r.mean.f_beta += m.f_beta;
    r.mean.f_beta_max += m.f_beta_max;
    r.mean.b_mu += m.b_mu;
    if (!std::isnan(m.bde)) {
      r.mean.bde += m.bde;
      ++bde_n;
    }
  }
  if (n > 0) {
    r.mean.mae /= n;
    r.mean.f_beta /= n;
    r.mean.f_beta_max /= n;
    r.mean.b_mu /= n;
  }
  r.mean.bde = bde_n > 0 ? r.mean.bde / static_cast<double>(bde_n) : std::numeric_limits<double>::quiet_NaN();
  if (!curves.empty()) {
    r.mean_pr = curves.front();
    for (int i = 0; i < kPrLevels; ++i) {
      double p = 0.0;
      double q = 0.0;
      for (const auto& c : curves) {
        p += c.precision[i];
        q += c.recall[i];
      }
      r.mean_pr.precision[i] = p / static_cast<double>(curves.size());
      r.mean_pr.recall[i] = q / static_cast<double>(curves.size());
    }
  }
  return r;
}

EvaluationReport evaluate_directory(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir) {
  const auto pdir = png_dir(pred_dir);
  const auto gdir = png_dir(gt_dir);
  const auto pred_stems = png_stems(pdir);
  const auto gt_stems = png_stems(gdir);
  const std::set<std::string> pred_set(pred_stems.begin(), pred_stems.end());
  const std::set<std::string> gt_set(gt_stems.begin(), gt_stems.end());

  std::vector<ImageMetrics> rows;
  std::vector<PrCurve> curves;
  std::vector<std::string> unmatched;
  for (const auto& stem : gt_stems) {
    if (!pred_set.count(stem)) {
      unmatched.push_back(stem);
      continue;
    }
    PrCurve curve;
    rows.push_back(evaluate_pair(stem, load_saliency(pdir / (stem + ".png")), load_mask(gdir / (stem + ".png")), &curve));
    curves.push_back(curve);
  }
  for (const auto& stem : pred_stems) {
    if (!gt_set.count(stem)) unmatched.push_back(stem);
  }
  EvaluationReport report = summarize(std::move(rows), curves);
  report.unmatched = std::move(unmatched);
  return report;
}

void write_metrics_csv(const std::filesystem::path& path, const EvaluationReport& report) {
  auto os = open_out(path);
  os << "id,mae,f_beta,f_beta_max,bde,b_mu\n";
  auto row = [&](const ImageMetrics& m) {
    os << m.id << ',' << format_number(m.mae) << ',' << format_number(m.f_beta) << ','
       << format_number(m.f_beta_max) << ',' << format_number(m.bde) << ',' << format_number(m.b_mu) << '\n';
  };
  for (const auto& m : report.rows) row(m);
  row(report.mean);
}

void write_metrics_jsonl(const std::filesystem::path& path, const EvaluationReport& report) {
  auto os = open_out(path);
  auto row = [&](const ImageMetrics& m) {
    nlohmann::json j{{"id", m.id}, {"mae", m.mae}, {"f_beta", m.f_beta}, {"f_beta_max", m.f_beta_max},
                     {"b_mu", m.b_mu}};
    j["bde"] = std::isnan(m.bde) ? nlohmann::json(nullptr) : nlohmann::json(m.bde);
    os << j.dump() << '\n';
  };
  for (const auto& m : report.rows) row(m);
  row(report.mean);
}

void write_pr_csv(const std::filesystem::path& path, const EvaluationReport& report) {
  auto os = open_out(path);
  os << "threshold,precision,recall\n";
  for (int i = 0; i < kPrLevels; ++i) {
    os << format_number(report.mean_pr.thresholds[i]) << ',' << format_number(report.mean_pr.precision[i]) << ','
       << format_number(report.mean_pr.recall[i]) << '\n';
  }
}

}  // namespace dsod

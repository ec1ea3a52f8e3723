#include "dsod/ablation.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <tuple>

#include "dsod/evaluate.hpp"
#include "dsod/png_io.hpp"
#include "dsod/synthetic.hpp"
#include "dsod/tiling.hpp"
#include "dsod/training.hpp"

namespace dsod {
namespace {

constexpr std::uint64_t kTrainSplit = 11;
constexpr std::uint64_t kTestSplit = 12;

struct Score {
  double bde = 0.0;
  double b_mu = 0.0;
};

Score score(Lrscn& lrscn, Hrrn& hrrn, const Dataset& test, int canonical) {
  std::vector<ImageMetrics> rows;
  for (const auto& rec : test) {
    const PipelineResult p = run_pipeline(rec.image, lrscn, hrrn, canonical);
    rows.push_back(evaluate_pair(rec.identifier, p.saliency, rec.mask));
  }
  const EvaluationReport r = summarize(std::move(rows), {});
  return {r.mean.bde, r.mean.b_mu};
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError(IoErrorCode::kWriteFailed, "cannot write '" + path.string() + "'");
  return os;
}

}  // namespace

AblationReport ablate_noise(const TrainConfig& base, std::ostream* progress) {
  base.validate();
  const AblationConfig& a = base.ablation;
  AblationReport report;
  for (const std::uint64_t seed : a.seeds) {
    TrainConfig cfg = base;
    cfg.seed = seed;
    const Dataset train = synthesize_dataset(mix_seed(seed, kTrainSplit), a.train_scenes, a.scene_size);
    const Dataset test = synthesize_dataset(mix_seed(seed, kTestSplit), a.test_scenes, a.scene_size);

    Lrscn lrscn = load_lrscn(train_lrscn(cfg, train).checkpoint);
    if (progress) *progress << "seed " << seed << ": lrscn trained" << std::endl;

    for (const int kernel : a.kernels) {
      Dataset noisy = train;
      if (kernel != 0) corrupt_dataset(noisy, kernel, seed);
      for (const bool unc : {false, true}) {
        TrainConfig arm = cfg;
        arm.hrrn.use_uncertainty = unc;
        arm.hrrn.noise_kernel = 0;  // noise already applied above
        Hrrn hrrn = load_hrrn(train_hrrn(arm, noisy).checkpoint);
        const Score s = score(lrscn, hrrn, test, cfg.hrrn.canonical_size);
        const std::string name = unc ? kArmUncertainty : kArmL1;
        report.rows.push_back({kernel, name, "bde", s.bde, seed});
        report.rows.push_back({kernel, name, "b_mu", s.b_mu, seed});
        if (progress) {
          *progress << "seed " << seed << " kernel " << kernel << " arm " << name << ": bde "
                    << format_number(s.bde) << " b_mu " << format_number(s.b_mu) << std::endl;
        }
      }
    }
  }
  report.medians = ablation_medians(report.rows);
  return report;
}

std::vector<AblationRow> ablation_medians(const std::vector<AblationRow>& rows) {
  // Keep first-appearance order of the groups.
  std::vector<std::tuple<int, std::string, std::string>> keys;
  std::map<std::tuple<int, std::string, std::string>, std::vector<double>> groups;
  for (const auto& r : rows) {
    const auto key = std::make_tuple(r.kernel, r.arm, r.metric);
    if (!groups.count(key)) keys.push_back(key);
    groups[key].push_back(r.value);
  }
  std::vector<AblationRow> out;
  for (const auto& key : keys) {
    std::vector<double> v = groups[key];
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    const double median = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), median, 0});
  }
  return out;
}

void write_ablation_long_csv(const std::filesystem::path& path, const AblationReport& report) {
  auto os = open_out(path);
  os << "kernel,arm,metric,value,seed\n";
  for (const auto& r : report.rows) {
    os << r.kernel << ',' << r.arm << ',' << r.metric << ',' << format_number(r.value) << ',' << r.seed << '\n';
  }
}

void write_ablation_seed_csv(const std::filesystem::path& path, const AblationReport& report) {
  auto os = open_out(path);
  os << "seed,kernel,arm,bde,b_mu\n";
  std::vector<std::tuple<std::uint64_t, int, std::string>> keys;
  std::map<std::tuple<std::uint64_t, int, std::string>, std::map<std::string, double>> values;
  for (const auto& r : report.rows) {
    const auto key = std::make_tuple(r.seed, r.kernel, r.arm);
    if (!values.count(key)) keys.push_back(key);
    values[key][r.metric] = r.value;
  }
  for (const auto& key : keys) {
    auto& m = values[key];
    os << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ',' << format_number(m["bde"])
       << ',' << format_number(m["b_mu"]) << '\n';
  }
}

void write_ablation_median_csv(const std::filesystem::path& path, const AblationReport& report) {
  auto os = open_out(path);
  os << "kernel,arm,metric,median\n";
  for (const auto& r : report.medians) {
    os << r.kernel << ',' << r.arm << ',' << r.metric << ',' << format_number(r.value) << '\n';
  }
}

}  // namespace dsod

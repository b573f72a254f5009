// nmlsdr command-line front end: run, synth, eval, compare.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "nmlsdr/config.hpp"
#include "nmlsdr/data.hpp"
#include "nmlsdr/error.hpp"
#include "nmlsdr/harness.hpp"
#include "nmlsdr/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw nmlsdr::IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json ParseJsonFile(const fs::path& path) {
  const std::string text = ReadFile(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw nmlsdr::ConfigError(path.string() + ": " + e.what());
  }
}

int Run(const std::string& config_path, const std::string& out_override,
        const std::string& eval_override) {
  const fs::path path(config_path);
  json config = ParseJsonFile(path);
  if (!eval_override.empty() && config.is_object()) {
    config["pipeline"]["eval"] = eval_override;
  }
  nmlsdr::harness::ExperimentPlan plan =
      nmlsdr::harness::PlanFromJson(config, path.parent_path());
  if (!out_override.empty()) plan.output_dir = out_override;
  const auto table = nmlsdr::harness::RunPlan(plan);
  std::cerr << "wrote " << table.rows().size() << " rows to "
            << (plan.output_dir / "results.csv").string() << "\n";
  return 0;
}

int Synth(std::uint64_t seed, const std::string& out,
          const nmlsdr::data::SyntheticOptions& options) {
  const auto split = nmlsdr::data::GenerateSynthetic(seed, options);
  const json provenance = {{"generator", "synthetic"},
                           {"samples_per_class", options.samples_per_class},
                           {"test_samples", options.test_samples}};
  nmlsdr::data::WriteBundle(fs::path(out) / "train", split.train, provenance,
                            seed);
  nmlsdr::data::WriteBundle(fs::path(out) / "test", split.test, provenance,
                            seed);
  return 0;
}

nmlsdr::harness::ResultsTable LoadTable(const std::string& path) {
  return nmlsdr::harness::ResultsTable::FromCsv(ReadFile(path));
}

int Eval(const std::string& table_path, const std::string& metric) {
  const auto table = LoadTable(table_path);
  const std::size_t index = nmlsdr::metrics::MetricIndex(metric);
  const auto methods = table.Methods();
  const auto datasets = table.Datasets();
  const auto grid = table.MeanGrid(index);

  json out;
  out["metric"] = nmlsdr::metrics::MetricsReport::kNames[index];
  json means = json::object();
  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (std::size_t d = 0; d < datasets.size(); ++d) {
      means[methods[m]][datasets[d]] = grid[m][d];
    }
  }
  out["means"] = means;
  json best = json::object();
  for (const auto& [name, count] : nmlsdr::harness::CountBest(table, index)) {
    best[name] = count;
  }
  out["best_counts"] = best;
  std::cout << out.dump(2) << "\n";
  return 0;
}

int Compare(const std::string& table_path, const std::string& metric,
            double alpha_level) {
  const auto table = LoadTable(table_path);
  json out = json::object();
  if (!metric.empty()) {
    const std::size_t index = nmlsdr::metrics::MetricIndex(metric);
    json totals = json::object();
    for (const auto& [name, score] :
         nmlsdr::harness::WilcoxonMatrix(table, index, alpha_level)) {
      totals[name] = score;
    }
    out[std::string(nmlsdr::metrics::MetricsReport::kNames[index])] = totals;
  } else {
    json mean = json::object();
    const auto count = nmlsdr::metrics::MetricsReport::kNames.size();
    for (std::size_t i = 0; i < count; ++i) {
      json totals = json::object();
      for (const auto& [name, score] :
           nmlsdr::harness::WilcoxonMatrix(table, i, alpha_level)) {
        totals[name] = score;
        mean[name] = mean.value(name, 0.0) + score / static_cast<double>(count);
      }
      out[std::string(nmlsdr::metrics::MetricsReport::kNames[i])] = totals;
    }
    out["mean_wilcoxon"] = mean;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise-robust multi-label semi-supervised dimensionality reduction"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::string eval_override;
  auto* run = app.add_subcommand("run", "Run an experiment grid from a JSON config");
  run->add_option("--config", config_path, "Run config (JSON)")->required();
  run->add_option("--out", out_override, "Override the output directory");
  run->add_option("--eval", eval_override, "Downstream protocol")
      ->check(CLI::IsMember({"semi", "supervised"}));

  std::uint64_t seed = 0;
  std::string synth_out;
  nmlsdr::data::SyntheticOptions options;
  auto* synth = app.add_subcommand("synth", "Write the synthetic train/test bundles");
  synth->add_option("--seed", seed, "Generator seed")->required();
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--samples-per-class", options.samples_per_class);
  synth->add_option("--test-samples", options.test_samples);

  std::string table_path;
  std::string metric = "ap";
  auto* eval = app.add_subcommand("eval", "Mean values and best counts for one metric");
  eval->add_option("--table", table_path, "results.csv")->required();
  eval->add_option("--metric", metric, "Metric name (hl, rl, ap, oe, cov, maf1, mif1)");

  std::string compare_metric;
  double alpha_level = 0.05;
  auto* compare = app.add_subcommand("compare", "Pairwise Wilcoxon score totals");
  compare->add_option("--table", table_path, "results.csv")->required();
  compare->add_option("--metric", compare_metric, "Single metric (default: all)");
  compare->add_option("--alpha", alpha_level, "Significance level");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return Run(config_path, out_override, eval_override);
    if (*synth) return Synth(seed, synth_out, options);
    if (*eval) return Eval(table_path, metric);
    if (*compare) return Compare(table_path, compare_metric, alpha_level);
  } catch (const nmlsdr::ExperimentError& e) {
    std::cerr << "error (" << nmlsdr::ErrorKindName(e.kind()) << "): " << e.what()
              << "\nconfig: " << e.config_snapshot() << "\n";
    return nmlsdr::ExitCodeFor(e.kind());
  } catch (const nmlsdr::Error& e) {
    std::cerr << "error (" << nmlsdr::ErrorKindName(e.kind()) << "): " << e.what()
              << "\n";
    return nmlsdr::ExitCodeFor(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error (io): " << e.what() << "\n";
    return 3;
  }
  return 1;
}

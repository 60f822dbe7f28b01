// Command-line front end: study, estimate, tables, population.
//
// Exit status: 0 success, 1 runtime failure, 2 usage or input/config failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "sae/census.hpp"
#include "sae/csv.hpp"
#include "sae/model_fit.hpp"
#include "sae/population.hpp"
#include "sae/report.hpp"
#include "sae/run_config.hpp"
#include "sae/sampling.hpp"
#include "sae/study.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;
constexpr const char* kVersion = "0.1.0";

// Input problems that map to exit status 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<int> parse_alphas(const std::string& text) {
  std::vector<int> alphas;
  for (const auto& item : sae::csv::split(text)) {
    const auto v = sae::csv::parse_int(item);
    if (!v || *v < 0 || *v > 2) throw UsageError("alpha must be 0, 1 or 2, got '" + item + "'");
    alphas.push_back(static_cast<int>(*v));
  }
  if (alphas.empty()) throw UsageError("no alphas given");
  return alphas;
}

struct StudyArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  long long seed = -1;
  int workers = -1;
  bool quiet = false;
};

int cmd_study(const StudyArgs& args) {
  std::ifstream in(args.config);
  if (!in) throw UsageError("cannot read config file " + args.config);
  auto cfg = sae::RunConfigFile::parse(in);
  for (const auto& o : args.overrides) cfg.set(o);
  if (args.seed >= 0) cfg.set("seed", std::to_string(args.seed));
  if (args.workers >= 0) cfg.set("workers", std::to_string(args.workers));
  if (!args.out.empty()) cfg.set("out", args.out);
  auto settings = sae::to_run_settings(cfg);
  settings.study.workers = resolve_workers(settings.workers);

  const fs::path out_dir(settings.out_dir);
  fs::create_directories(out_dir);

  sae::StudyHooks hooks;
  if (!args.quiet) {
    hooks.progress = [](std::size_t done, std::size_t total) {
      std::cerr << "\rreplicate " << done << '/' << total << std::flush;
      if (done == total) std::cerr << '\n';
    };
  }
  const auto start = std::chrono::steady_clock::now();
  const auto metrics = sae::run_study(settings.study, hooks);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const auto& case_name = settings.study.sampling.name;
  const auto& scenario = settings.study.scenario.name;
  const auto entities = sae::emit_boxplot_data(metrics, case_name, scenario);
  {
    auto out = open_out(out_dir / "entities.csv");
    sae::write_entities_csv(out, entities);
  }
  {
    auto out = open_out(out_dir / "tables.csv");
    sae::write_tables_csv(out, sae::tables_from_entities(entities));
  }
  std::vector<std::pair<std::string, std::string>> manifest;
  for (const auto& [k, v] : cfg.entries()) manifest.emplace_back("config." + k, v);
  manifest.emplace_back("seed", std::to_string(settings.study.seed));
  manifest.emplace_back("version", kVersion);
  manifest.emplace_back("workers", std::to_string(settings.study.workers));
  manifest.emplace_back("replicates", std::to_string(metrics.replicates));
  manifest.emplace_back("wall_time_seconds", sae::csv::format_fixed(wall, 3));
  {
    auto out = open_out(out_dir / "run_manifest");
    sae::write_manifest(out, manifest);
  }
  if (!args.quiet) std::cerr << "wrote " << out_dir.string() << "/{tables.csv,entities.csv,run_manifest}\n";
  return kOk;
}

struct EstimateArgs {
  std::string population;
  std::string estimator = "MELL2";
  std::string alphas = "0,1";
  std::size_t censuses = 100;
  std::size_t m_d = 0;
  std::size_t n_dj = 0;
  std::uint64_t seed = 1;
  double z = 0.0;
  double fraction = 0.6;
  std::string subarea_pool = "pooled";
  std::string out;
  std::string dump;
  int workers = 1;
};

int cmd_estimate(const EstimateArgs& args) {
  std::ifstream in(args.population);
  if (!in) throw UsageError("cannot read population file " + args.population);
  sae::Population pop;
  try {
    pop = sae::read_population_csv(in);
  } catch (const sae::InvalidInput& e) {
    throw UsageError(e.what());
  }
  const auto& layout = pop.layout();
  const auto alphas = parse_alphas(args.alphas);
  const auto kind = sae::parse_estimator(args.estimator);

  std::size_t m = args.m_d;
  std::size_t n = args.n_dj;
  if (m == 0) m = layout.num_subareas(0);
  if (n == 0) n = layout.subarea_size(0, 0);
  const sae::RngStream master(args.seed);
  auto sample_rng = master.substream(sae::StreamPurpose::Sample);
  const auto index = sae::draw_sample(layout, sae::SamplingDesign::uniform(m, n), sample_rng);
  const auto sample = sae::extract_sample(pop, index);
  const auto fit = sae::fit_ols(sample);
  const auto effects = sae::decompose_residuals(fit, sample);
  const auto onefold = sae::decompose_onefold(fit, sample);

  const double z = args.z > 0.0 ? args.z : sae::poverty_line(pop, args.fraction);
  const auto params = sae::make_fgt_params(z, alphas);
  sae::CensusOptions options;
  options.workers = resolve_workers(static_cast<unsigned>(std::max(0, args.workers)));
  if (args.subarea_pool == "per-area") {
    options.subarea_pool = sae::SubareaPool::PerArea;
  } else if (args.subarea_pool != "pooled") {
    throw UsageError("subarea pool must be pooled or per-area");
  }
  const sae::CensusSimulator sim(*pop.census, index, fit, effects, &onefold, options);
  const auto run = sim.simulate(kind, params, args.censuses, master.substream(sae::StreamPurpose::Census));
  const auto est = sae::summarize(kind, params, run);

  std::ofstream file;
  if (!args.out.empty()) file = open_out(args.out);
  std::ostream& out = args.out.empty() ? std::cout : file;
  out << "estimator,alpha,d,j_or_blank,sampled,estimate,naive_mse\n";
  for (std::size_t a = 0; a < params.size(); ++a) {
    for (std::size_t d = 0; d < layout.num_areas(); ++d) {
      out << sae::to_string(kind) << ',' << alphas[a] << ',' << d + 1 << ",,"
          << (index.sampled_subareas(d).empty() ? 0 : 1) << ',' << sae::csv::format_double(est.area_estimate[a][d])
          << ',' << sae::csv::format_double(est.area_mse[a][d]) << '\n';
      for (std::size_t j = 0; j < layout.num_subareas(d); ++j) {
        const auto s = layout.subarea_index(d, j);
        out << sae::to_string(kind) << ',' << alphas[a] << ',' << d + 1 << ',' << j + 1 << ','
            << (index.is_sampled_subarea(s) ? 1 : 0) << ',' << sae::csv::format_double(est.subarea_estimate[a][s])
            << ',' << sae::csv::format_double(est.subarea_mse[a][s]) << '\n';
      }
    }
  }
  if (!args.dump.empty()) {
    auto dump = open_out(args.dump);
    sae::write_census_run_csv(dump, kind, params, run, layout);
  }
  return kOk;
}

int cmd_tables(const std::vector<std::string>& inputs, const std::string& out_path) {
  if (inputs.empty()) throw UsageError("tables: no entity files given");
  std::vector<sae::EntityRow> rows;
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read " + path);
    try {
      auto part = sae::read_entities_csv(in);
      rows.insert(rows.end(), part.begin(), part.end());
    } catch (const sae::InvalidInput& e) {
      throw UsageError(path + ": " + e.what());
    }
  }
  const auto tables = sae::tables_from_entities(rows);
  if (out_path.empty()) {
    sae::write_tables_csv(std::cout, tables);
  } else {
    auto out = open_out(out_path);
    sae::write_tables_csv(out, tables);
  }
  return kOk;
}

int cmd_population(const std::string& config_path, const std::vector<std::string>& overrides,
                   std::size_t replicate, const std::string& out_path) {
  std::ifstream in(config_path);
  if (!in) throw UsageError("cannot read config file " + config_path);
  auto cfg = sae::RunConfigFile::parse(in);
  for (const auto& o : overrides) cfg.set(o);
  const auto settings = sae::to_run_settings(cfg);
  const auto ctx = sae::prepare_study(settings.study);
  const sae::RngStream rep = sae::RngStream(settings.study.seed)
                                 .substream({static_cast<std::uint64_t>(sae::StreamPurpose::Replicate), replicate});
  auto pop_rng = rep.substream(sae::StreamPurpose::Population);
  const auto pop = sae::generate_population(ctx.census, settings.study.scenario.model, pop_rng);
  auto out = open_out(out_path);
  sae::write_population_csv(out, pop);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated-census estimators of FGT poverty measures under a two-fold nested error model"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  StudyArgs study;
  auto* study_cmd = app.add_subcommand("study", "Run a Monte Carlo study and write tables.csv, entities.csv, run_manifest");
  study_cmd->add_option("--config", study.config, "Configuration file")->required();
  study_cmd->add_option("--set", study.overrides, "Override key=value (repeatable)");
  study_cmd->add_option("--out", study.out, "Output directory");
  study_cmd->add_option("--seed", study.seed, "Master seed");
  study_cmd->add_option("--workers", study.workers, "Worker threads (0 = available parallelism)");
  study_cmd->add_flag("--quiet", study.quiet, "No progress output");

  EstimateArgs est;
  auto* est_cmd = app.add_subcommand("estimate", "Estimate FGT measures for one population file");
  est_cmd->add_option("--population", est.population, "Population CSV (d,j,k,x2..xp,y)")->required();
  est_cmd->add_option("--estimator", est.estimator, "ELL, MELL1, MELL2 or ELL1");
  est_cmd->add_option("--alphas", est.alphas, "Comma list of FGT alphas");
  est_cmd->add_option("-B,--censuses", est.censuses, "Simulated censuses")->check(CLI::PositiveNumber);
  est_cmd->add_option("--m", est.m_d, "Subareas sampled per area (default: all)");
  est_cmd->add_option("--n", est.n_dj, "Units sampled per sampled subarea (default: all)");
  est_cmd->add_option("--seed", est.seed, "Seed for the sample and the censuses");
  est_cmd->add_option("--z", est.z, "Poverty line (default: fraction x median welfare)");
  est_cmd->add_option("--fraction", est.fraction, "Poverty line fraction of the median");
  est_cmd->add_option("--subarea-pool", est.subarea_pool, "pooled or per-area");
  est_cmd->add_option("--workers", est.workers, "Worker threads (0 = available parallelism)");
  est_cmd->add_option("--out", est.out, "Output CSV (default: stdout)");
  est_cmd->add_option("--dump-censuses", est.dump, "Write per-census measures to this CSV");

  std::vector<std::string> table_inputs;
  std::string table_out;
  auto* tables_cmd = app.add_subcommand("tables", "Re-aggregate entities.csv files into the grouped table");
  tables_cmd->add_option("inputs", table_inputs, "entities.csv files");
  tables_cmd->add_option("--out", table_out, "Output CSV (default: stdout)");

  std::string pop_config;
  std::vector<std::string> pop_overrides;
  std::size_t pop_replicate = 0;
  std::string pop_out;
  auto* pop_cmd = app.add_subcommand("population", "Write one generated population as CSV");
  pop_cmd->add_option("--config", pop_config, "Configuration file")->required();
  pop_cmd->add_option("--set", pop_overrides, "Override key=value (repeatable)");
  pop_cmd->add_option("--replicate", pop_replicate, "Replicate index (0-based)");
  pop_cmd->add_option("--out", pop_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*study_cmd) return cmd_study(study);
    if (*est_cmd) return cmd_estimate(est);
    if (*tables_cmd) return cmd_tables(table_inputs, table_out);
    if (*pop_cmd) return cmd_population(pop_config, pop_overrides, pop_replicate, pop_out);
  } catch (const sae::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}

// Command line driver: crisp <pretrain|run|report|list-presets> [options]

#include "crisp/errors.hpp"
#include "crisp/experiment.hpp"
#include "crisp/serialize.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <thread>

namespace {

enum Exit : int { kOk = 0, kConfig = 2, kData = 3, kRuntime = 4 };

struct Common {
  std::string config;
  std::string preset;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  bool dry_run = false;
  int repeats = 1;
  std::string cache_dir;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "INI experiment file");
  cmd->add_option("--preset", c.preset, "named preset (see list-presets)");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&c](std::uint64_t s) { c.seed = s, c.seed_set = true; }, "master seed");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_flag("--dry-run", c.dry_run, "validate and print the resolved config only");
  cmd->add_option("--repeats", c.repeats, "number of seeds run in parallel")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--cache-dir", c.cache_dir, "pre-training cache (default $CRISP_CACHE_DIR)");
}

crisp::ExperimentSpec resolve_spec(const Common& c) {
  if (!c.config.empty() && !c.preset.empty()) {
    throw crisp::ConfigError("--config and --preset are mutually exclusive");
  }
  crisp::ExperimentSpec spec;
  if (!c.config.empty()) {
    spec = crisp::load_spec(c.config);
  } else if (!c.preset.empty()) {
    spec = crisp::preset_spec(c.preset);
  } else {
    throw crisp::ConfigError("one of --config or --preset is required");
  }
  if (c.seed_set) spec.seed = c.seed;
  if (!c.out.empty()) spec.out = c.out;
  spec.resolve();
  spec.validate();
  return spec;
}

crisp::RunOptions run_options(const Common& c) {
  crisp::RunOptions options;
  options.log = &std::clog;
  if (!c.cache_dir.empty()) {
    options.cache_dir = c.cache_dir;
  } else if (const char* env = std::getenv("CRISP_CACHE_DIR"); env && *env) {
    options.cache_dir = env;
  }
  return options;
}

void print_summary(const crisp::Report& report) {
  std::cout << report.experiment << '\n';
  for (const auto& curve : report.curves) {
    std::cout << "  " << std::left << std::setw(34) << curve.name << std::right << std::fixed
              << std::setprecision(4) << " mean " << curve.mean() << "  newest50 "
              << curve.mean_newest(0.5) << "  baseline " << curve.baseline << '\n';
  }
  for (const auto& [key, value] : report.metrics) {
    std::cout << "  " << std::left << std::setw(34) << key << std::right << ' ' << value << '\n';
  }
}

int run_repeats(const crisp::ExperimentSpec& base, const Common& c) {
  const auto options = run_options(c);
  if (c.repeats == 1) {
    print_summary(crisp::run_experiment(base, options));
    return kOk;
  }
  std::vector<crisp::ExperimentSpec> jobs;
  for (int r = 0; r < c.repeats; ++r) {
    crisp::ExperimentSpec spec = base;
    spec.seed = base.seed + static_cast<std::uint64_t>(r);
    spec.out = base.out / ("seed-" + std::to_string(spec.seed));
    jobs.push_back(std::move(spec));
  }
  std::atomic<std::size_t> next{0};
  std::mutex lock;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        const auto report = crisp::run_experiment(jobs[i], options);
        std::lock_guard<std::mutex> guard(lock);
        print_summary(report);
      } catch (...) {
        std::lock_guard<std::mutex> guard(lock);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto count = std::min<std::size_t>(jobs.size(), hw);
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < count; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return kOk;
}

int pretrain(const crisp::ExperimentSpec& spec, const Common& c) {
  const auto options = run_options(c);
  const auto sensory = crisp::load_sensory_data(spec);
  const auto pre = crisp::cache_pretrained(spec, options, sensory);
  std::filesystem::create_directories(spec.out);
  if (pre.ca3) crisp::write_bytes(spec.out / "ca3.crsp", crisp::serialize(*pre.ca3));
  if (pre.dentate) crisp::write_bytes(spec.out / "dg.crsp", crisp::serialize(*pre.dentate));
  if (pre.si_codec) crisp::write_bytes(spec.out / "si.crsp", crisp::serialize(*pre.si_codec));
  for (const auto& [stage, hash] : pre.hashes) std::cout << stage << ' ' << hash << '\n';
  return kOk;
}

int report(const std::string& dir) {
  const auto path = std::filesystem::path(dir) / "manifest.json";
  std::ifstream in(path);
  if (!in) throw crisp::IoError("cannot open " + path.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw crisp::ParseError(std::string("manifest.json: ") + e.what(), 0);
  }
  std::cout << manifest.value("experiment", std::string("?")) << '\n';
  for (const auto& curve : manifest.value("curves", nlohmann::json::array())) {
    std::cout << "  " << std::left << std::setw(34) << curve.value("name", std::string())
              << std::right << std::fixed << std::setprecision(4) << " mean "
              << curve.value("mean", 0.0) << "  newest50 " << curve.value("mean_newest_half", 0.0)
              << "  slope " << std::scientific << std::setprecision(3)
              << curve.value("trend_slope", 0.0) << '\n';
  }
  for (const auto& [key, value] : manifest.value("metrics", nlohmann::json::object()).items()) {
    std::cout << "  " << std::left << std::setw(34) << key << std::right << ' ' << value << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CRISP hippocampus sequence memory experiments"};
  app.require_subcommand(1);
  Common common;
  auto* run_cmd = app.add_subcommand("run", "pre-train, store, recall and write reports");
  add_common(run_cmd, common);
  auto* pre_cmd = app.add_subcommand("pretrain", "pre-train CA3/DG/SI pathways only");
  add_common(pre_cmd, common);
  std::string report_dir;
  auto* report_cmd = app.add_subcommand("report", "summarize a finished run");
  report_cmd->add_option("--out", report_dir, "run output directory")->required();
  auto* list_cmd = app.add_subcommand("list-presets", "print the available presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  try {
    if (list_cmd->parsed()) {
      for (const auto& p : crisp::presets()) {
        std::cout << std::left << std::setw(28) << p.name << p.description << '\n';
      }
      return kOk;
    }
    if (report_cmd->parsed()) return report(report_dir);
    const auto spec = resolve_spec(common);
    if (common.dry_run) {
      std::cout << crisp::render_spec(spec);
      return kOk;
    }
    if (pre_cmd->parsed()) return pretrain(spec, common);
    return run_repeats(spec, common);
  } catch (const crisp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const crisp::UsageError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const crisp::ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const crisp::IoError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const crisp::IntegrityError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}

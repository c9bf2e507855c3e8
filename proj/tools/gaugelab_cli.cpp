// Command-line driver for the gauge-dressing library.
//
// Subcommands:
//   run <config>                 execute every task, write results.ndjson
//   gauge-check <config>         gauge-rotate all VEV tasks, fail if not invariant
//   xi-check <config>            weak divergence identity of the configured kernel
//   refine <config> --factor K   rerun at K-fold resolution, emit companion values
//
// Exit codes: 0 success, 2 config/validation error, 3 numerical check failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "gaugelab/config.hpp"

namespace fs = std::filesystem;
using namespace gaugelab;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_results(const std::string& out_dir, const std::vector<ResultRecord>& recs) {
  const std::string text = to_ndjson(recs);
  if (out_dir.empty()) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  fs::create_directories(out_dir);
  const fs::path p = fs::path(out_dir) / "results.ndjson";
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + p.string());
  std::fprintf(stderr, "wrote %zu records to %s\n", recs.size(), p.string().c_str());
}

void print_timing(const std::vector<ResultRecord>& recs) {
  for (const ResultRecord& r : recs)
    if (r.wall_ms > 0.0) std::fprintf(stderr, "  %-24s %8.1f ms\n", r.id.c_str(), r.wall_ms);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gauge-dressed spinor fields: connections, VEVs and transition probabilities"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int threads = 1, factor = 2, samples = 0;
  std::uint64_t seed = 1;
  double tolerance = -1.0;
  app.add_option("--out", out_dir, "output directory (default: stdout)");
  app.add_option("--threads", threads, "worker thread count")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "seed for gauge-rotation sampling");
  app.add_option("--tolerance", tolerance, "override the config tolerance");

  CLI::App* c_run = app.add_subcommand("run", "execute the task list");
  c_run->add_option("config", config_path)->required();

  CLI::App* c_gauge = app.add_subcommand("gauge-check", "verify gauge invariance of all VEV tasks");
  c_gauge->add_option("config", config_path)->required();
  c_gauge->add_option("--samples", samples, "gauge rotations per task")->check(CLI::PositiveNumber);

  CLI::App* c_xi = app.add_subcommand("xi-check", "verify the kernel divergence identity");
  c_xi->add_option("config", config_path)->required();

  CLI::App* c_refine = app.add_subcommand("refine", "rerun at higher resolution");
  c_refine->add_option("config", config_path)->required();
  c_refine->add_option("--factor", factor, "resolution multiplier")->check(CLI::PositiveNumber);

  // global flags remain usable after the subcommand name
  for (CLI::App* s : {c_run, c_gauge, c_xi, c_refine}) s->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    set_thread_count(threads);
    const ExperimentConfig cfg = parse_config(slurp(config_path));
    validate_config(cfg);
    RunOptions opt;
    opt.seed = seed;
    opt.samples = samples;
    opt.tolerance = tolerance;
    const double tol = effective_tolerance(cfg, opt);

    if (c_run->parsed()) {
      const auto recs = run_config(cfg, opt);
      print_timing(recs);
      write_results(out_dir, recs);
      return 0;
    }

    if (c_gauge->parsed()) {
      const int n = samples > 0 ? samples : 3;
      const auto recs = gauge_check(cfg, n, opt);
      if (recs.empty()) throw ConfigError("gauge-check: config defines no VEV tasks");
      write_results(out_dir, recs);
      bool ok = true;
      for (const ResultRecord& r : recs) {
        const bool pass = r.value.real() <= tol;
        std::fprintf(stderr, "%s %-24s max rel deviation %.3e (tolerance %.3e)\n",
                     pass ? "PASS" : "FAIL", r.id.c_str(), r.value.real(), tol);
        ok = ok && pass;
      }
      return ok ? 0 : 3;
    }

    if (c_xi->parsed()) {
      const double dev = cfgdetail::xi_check_value(cfg);
      ResultRecord r;
      r.id = "xi-check";
      r.kind = "xi-check";
      r.digest = fnv1a_hex(canonical_config(cfg).dump() + "\nxi-check");
      r.value = cd(dev, 0.0);
      r.seed = seed;
      write_results(out_dir, {r});
      const bool pass = dev <= tol;
      std::fprintf(stderr, "%s divergence identity deviation %.3e (tolerance %.3e)\n",
                   pass ? "PASS" : "FAIL", dev, tol);
      return pass ? 0 : 3;
    }

    // refine
    const auto recs = run_refine(cfg, factor, opt);
    print_timing(recs);
    write_results(out_dir, recs);
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const TaskError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

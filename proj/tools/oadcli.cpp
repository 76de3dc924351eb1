// Command-line front end for the optical-attack detection library. Only the
// C API from oad/oad.h is used here, so this doubles as a usage example for
// embedding the shared library.
#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "oad/oad.h"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string output_dir;
  std::string thresholds_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int fail(oad_status status, const char* what) {
  std::fprintf(stderr, "error: %s: %s\n", what, oad_last_error());
  return (status == OAD_ERROR_CONFIG || status == OAD_ERROR_PARSE) ? 2 : 1;
}

// Loads the config (or defaults) and applies --seed/--output-dir overrides.
int load_config(const CommonArgs& args, oad_config** config) {
  oad_status status = args.config_path.empty()
                          ? oad_config_default(config)
                          : oad_config_load(args.config_path.c_str(), config);
  if (status != OAD_OK) return fail(status, "loading config");
  if (args.seed_set) oad_config_set_seed(*config, args.seed);
  if (!args.output_dir.empty())
    oad_config_set_output_dir(*config, args.output_dir.c_str());
  return 0;
}

std::string output_dir_of(const oad_config* config) {
  char buf[4096];
  if (oad_config_get_output_dir(config, buf, sizeof(buf)) != OAD_OK) return ".";
  return buf;
}

std::string thresholds_path_of(const CommonArgs& args, const oad_config* config) {
  if (!args.thresholds_path.empty()) return args.thresholds_path;
  return output_dir_of(config) + "/thresholds.json";
}

int load_thresholds(const std::string& path, oad_thresholds** thresholds) {
  const oad_status status = oad_thresholds_load(path.c_str(), thresholds);
  if (status == OAD_ERROR_IO) {
    std::fprintf(stderr, "error: thresholds missing: %s (run calibrate first)\n",
                 path.c_str());
    return 1;
  }
  if (status != OAD_OK) return fail(status, "loading thresholds");
  return 0;
}

int write_and_print(oad_report* report, const std::string& dir) {
  oad_status status = oad_report_write(report, dir.c_str());
  if (status != OAD_OK) return fail(status, "writing report");
  char* summary = nullptr;
  status = oad_report_summary(report, &summary);
  if (status != OAD_OK) return fail(status, "formatting summary");
  std::fputs(summary, stdout);
  oad_string_free(summary);
  std::printf("outputs written to %s\n", dir.c_str());
  return 0;
}

int cmd_calibrate(const CommonArgs& args) {
  oad_config* config = nullptr;
  if (const int rc = load_config(args, &config)) return rc;
  oad_thresholds* thresholds = nullptr;
  oad_status status = oad_calibrate(config, &thresholds);
  if (status != OAD_OK) {
    oad_config_free(config);
    return fail(status, "calibrating");
  }
  const std::string path = thresholds_path_of(args, config);
  status = oad_thresholds_save(thresholds, path.c_str());
  oad_thresholds_free(thresholds);
  oad_config_free(config);
  if (status != OAD_OK) return fail(status, "saving thresholds");
  std::printf("thresholds written to %s\n", path.c_str());
  return 0;
}

int cmd_detect(const CommonArgs& args, int scenario) {
  oad_config* config = nullptr;
  if (const int rc = load_config(args, &config)) return rc;
  oad_thresholds* thresholds = nullptr;
  if (const int rc = load_thresholds(thresholds_path_of(args, config), &thresholds)) {
    oad_config_free(config);
    return rc;
  }
  oad_report* report = nullptr;
  const oad_status status = oad_run_detection(config, thresholds, scenario, &report);
  oad_thresholds_free(thresholds);
  if (status != OAD_OK) {
    oad_config_free(config);
    return fail(status, "running detection");
  }
  const int rc = write_and_print(report, output_dir_of(config));
  oad_report_free(report);
  oad_config_free(config);
  return rc;
}

int cmd_identify(const CommonArgs& args) {
  oad_config* config = nullptr;
  if (const int rc = load_config(args, &config)) return rc;
  oad_thresholds* thresholds = nullptr;
  if (const int rc = load_thresholds(thresholds_path_of(args, config), &thresholds)) {
    oad_config_free(config);
    return rc;
  }
  oad_report* report = nullptr;
  const oad_status status = oad_run_identification(config, thresholds, &report);
  oad_thresholds_free(thresholds);
  if (status != OAD_OK) {
    oad_config_free(config);
    return fail(status, "running identification");
  }
  const int rc = write_and_print(report, output_dir_of(config));
  oad_report_free(report);
  oad_config_free(config);
  return rc;
}

int cmd_sweep(const CommonArgs& args, const std::string& axis) {
  const int axis_id =
      axis == "spoof_width" ? OAD_SWEEP_SPOOF_WIDTH : OAD_SWEEP_FACULA_COVERAGE;
  oad_config* config = nullptr;
  if (const int rc = load_config(args, &config)) return rc;
  oad_thresholds* thresholds = nullptr;
  if (const int rc = load_thresholds(thresholds_path_of(args, config), &thresholds)) {
    oad_config_free(config);
    return rc;
  }
  oad_report* report = nullptr;
  const oad_status status = oad_run_sweep(config, thresholds, axis_id, &report);
  oad_thresholds_free(thresholds);
  if (status != OAD_OK) {
    oad_config_free(config);
    return fail(status, "running sweep");
  }
  const int rc = write_and_print(report, output_dir_of(config));
  oad_report_free(report);
  oad_config_free(config);
  return rc;
}

int cmd_report(const std::string& input) {
  char* summary = nullptr;
  const oad_status status = oad_verify_report_file(input.c_str(), &summary);
  if (status != OAD_OK) return fail(status, "verifying report");
  std::fputs(summary, stdout);
  oad_string_free(summary);
  std::printf("report is self-consistent\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optical-attack detection and identification for LiDAR/camera rigs"};
  app.require_subcommand(1);

  CommonArgs args;
  int scenario = 0;
  std::string axis = "spoof_width";
  std::string report_input;

  const auto add_common = [&](CLI::App* cmd, bool needs_thresholds) {
    cmd->add_option("--config", args.config_path, "JSON experiment config");
    cmd->add_option("--seed", args.seed, "override the config seed")
        ->each([&](const std::string&) { args.seed_set = true; });
    cmd->add_option("--output-dir", args.output_dir, "override the output directory");
    if (needs_thresholds)
      cmd->add_option("--thresholds", args.thresholds_path,
                      "thresholds file (default <output_dir>/thresholds.json)");
  };

  auto* calibrate = app.add_subcommand("calibrate", "calibrate detection thresholds");
  add_common(calibrate, true);

  auto* detect = app.add_subcommand("detect", "run the detection experiment");
  add_common(detect, true);
  detect->add_option("--scenario", scenario, "1, 2 or 0 for both")
      ->check(CLI::IsMember({0, 1, 2}));

  auto* identify = app.add_subcommand("identify", "run the identification experiment");
  add_common(identify, true);

  auto* sweep = app.add_subcommand("sweep", "run a sensitivity sweep");
  add_common(sweep, true);
  sweep->add_option("--axis", axis, "swept attack parameter")
      ->check(CLI::IsMember({"spoof_width", "facula_coverage"}));

  auto* report = app.add_subcommand("report", "verify and summarize a report.json");
  report->add_option("--input", report_input, "path to report.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  if (calibrate->parsed()) return cmd_calibrate(args);
  if (detect->parsed()) return cmd_detect(args, scenario);
  if (identify->parsed()) return cmd_identify(args);
  if (sweep->parsed()) return cmd_sweep(args, axis);
  if (report->parsed()) return cmd_report(report_input);
  return 2;
}

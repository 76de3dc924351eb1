#include "oad/oad.h"

#include <cstring>
#include <string>
#include <variant>

#include "oad/errors.hpp"
#include "oad/harness.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

struct Report {
  std::variant<oad::DetectionReport, oad::IdentificationReport, oad::SweepReport> value;
};

template <typename Fn>
oad_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return OAD_OK;
  } catch (const oad::ConfigError& e) {
    set_error(e.what());
    return OAD_ERROR_CONFIG;
  } catch (const oad::ParseError& e) {
    set_error(e.what());
    return OAD_ERROR_PARSE;
  } catch (const oad::IoError& e) {
    set_error(e.what());
    return OAD_ERROR_IO;
  } catch (const oad::ContractError& e) {
    set_error(e.what());
    return OAD_ERROR_CONTRACT;
  } catch (const oad::DomainError& e) {
    set_error(e.what());
    return OAD_ERROR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    set_error(e.what());
    return OAD_ERROR_INTERNAL;
  } catch (...) {
    set_error("unknown error");
    return OAD_ERROR_INTERNAL;
  }
}

oad_status invalid_argument(const char* message) {
  set_error(message);
  return OAD_ERROR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct oad_config {
  oad::ExperimentConfig value;
};

struct oad_thresholds {
  oad::Calibration value;
};

struct oad_report {
  Report value;
};

extern "C" {

const char* oad_version(void) { return "1.0.0"; }

const char* oad_last_error(void) { return g_last_error.c_str(); }

oad_status oad_config_default(oad_config** out) {
  if (!out) return invalid_argument("out is null");
  return guarded([&] { *out = new oad_config{oad::default_config()}; });
}

oad_status oad_config_load(const char* path, oad_config** out) {
  if (!path || !out) return invalid_argument("path/out is null");
  return guarded([&] { *out = new oad_config{oad::load_config(path)}; });
}

oad_status oad_config_parse(const char* json_text, oad_config** out) {
  if (!json_text || !out) return invalid_argument("json_text/out is null");
  return guarded([&] { *out = new oad_config{oad::parse_config(json_text)}; });
}

oad_status oad_config_set_seed(oad_config* config, uint64_t seed) {
  if (!config) return invalid_argument("config is null");
  config->value.seed = seed;
  g_last_error.clear();
  return OAD_OK;
}

oad_status oad_config_set_output_dir(oad_config* config, const char* dir) {
  if (!config || !dir) return invalid_argument("config/dir is null");
  config->value.output_dir = dir;
  g_last_error.clear();
  return OAD_OK;
}

oad_status oad_config_get_output_dir(const oad_config* config, char* buf, size_t bufsize) {
  if (!config || !buf) return invalid_argument("config/buf is null");
  const auto& dir = config->value.output_dir;
  if (dir.size() + 1 > bufsize) return invalid_argument("buffer too small");
  std::memcpy(buf, dir.c_str(), dir.size() + 1);
  g_last_error.clear();
  return OAD_OK;
}

void oad_config_free(oad_config* config) { delete config; }

oad_status oad_calibrate(const oad_config* config, oad_thresholds** out) {
  if (!config || !out) return invalid_argument("config/out is null");
  return guarded([&] { *out = new oad_thresholds{oad::calibrate(config->value)}; });
}

oad_status oad_thresholds_save(const oad_thresholds* thresholds, const char* path) {
  if (!thresholds || !path) return invalid_argument("thresholds/path is null");
  return guarded([&] { oad::save_calibration(thresholds->value, path); });
}

oad_status oad_thresholds_load(const char* path, oad_thresholds** out) {
  if (!path || !out) return invalid_argument("path/out is null");
  return guarded([&] { *out = new oad_thresholds{oad::load_calibration(path)}; });
}

void oad_thresholds_free(oad_thresholds* thresholds) { delete thresholds; }

oad_status oad_run_detection(const oad_config* config, const oad_thresholds* thresholds,
                             int scenario, oad_report** out) {
  if (!config || !thresholds || !out)
    return invalid_argument("config/thresholds/out is null");
  if (scenario < 0 || scenario > 2) return invalid_argument("scenario must be 0, 1 or 2");
  return guarded([&] {
    *out = new oad_report{
        {oad::run_detection_experiment(config->value, thresholds->value, scenario)}};
  });
}

oad_status oad_run_identification(const oad_config* config,
                                  const oad_thresholds* thresholds, oad_report** out) {
  if (!config || !thresholds || !out)
    return invalid_argument("config/thresholds/out is null");
  return guarded([&] {
    *out = new oad_report{
        {oad::run_identification_experiment(config->value, thresholds->value)}};
  });
}

oad_status oad_run_sweep(const oad_config* config, const oad_thresholds* thresholds,
                         int axis, oad_report** out) {
  if (!config || !thresholds || !out)
    return invalid_argument("config/thresholds/out is null");
  if (axis != OAD_SWEEP_SPOOF_WIDTH && axis != OAD_SWEEP_FACULA_COVERAGE)
    return invalid_argument("unknown sweep axis");
  return guarded([&] {
    const auto sweep_axis = axis == OAD_SWEEP_SPOOF_WIDTH
                                ? oad::SweepAxis::kSpoofWidth
                                : oad::SweepAxis::kFaculaCoverage;
    *out = new oad_report{
        {oad::run_sensitivity_sweep(config->value, thresholds->value, sweep_axis)}};
  });
}

oad_status oad_report_write(const oad_report* report, const char* dir) {
  if (!report || !dir) return invalid_argument("report/dir is null");
  return guarded([&] {
    std::visit(
        [&](const auto& r) {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, oad::DetectionReport>)
            oad::write_detection_outputs(r, dir);
          else if constexpr (std::is_same_v<T, oad::IdentificationReport>)
            oad::write_identification_outputs(r, dir);
          else
            oad::write_sweep_outputs(r, dir);
        },
        report->value.value);
  });
}

oad_status oad_report_summary(const oad_report* report, char** out) {
  if (!report || !out) return invalid_argument("report/out is null");
  return guarded([&] {
    const std::string text = std::visit(
        [](const auto& r) {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, oad::DetectionReport>)
            return oad::detection_summary(r);
          else if constexpr (std::is_same_v<T, oad::IdentificationReport>)
            return oad::identification_summary(r);
          else
            return oad::sweep_summary(r);
        },
        report->value.value);
    *out = dup_string(text);
  });
}

oad_status oad_report_json(const oad_report* report, char** out) {
  if (!report || !out) return invalid_argument("report/out is null");
  return guarded([&] {
    const std::string text = std::visit(
        [](const auto& r) {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, oad::DetectionReport>)
            return oad::detection_report_json(r);
          else if constexpr (std::is_same_v<T, oad::IdentificationReport>)
            return oad::identification_report_json(r);
          else
            return oad::sweep_report_json(r);
        },
        report->value.value);
    *out = dup_string(text);
  });
}

void oad_report_free(oad_report* report) { delete report; }

oad_status oad_verify_report_file(const char* path, char** summary_out) {
  if (!path || !summary_out) return invalid_argument("path/summary_out is null");
  return guarded([&] { *summary_out = dup_string(oad::verify_report_file(path)); });
}

void oad_string_free(char* s) { delete[] s; }

}  // extern "C"

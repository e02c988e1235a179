#include "crimepass.h"

#include <string>

#include "crimepass/pipeline.hpp"

using crimepass::Error;
using crimepass::ErrorKind;

struct cp_pipeline {
  crimepass::pipeline::Pipeline impl;
  std::string last_error;

  cp_pipeline(crimepass::config::PipelineConfig config, std::string out_dir)
      : impl(std::move(config), std::move(out_dir)) {}
};

namespace {

std::string g_create_error; // creation failures have no handle to hang onto

cp_status status_of(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Config: return CP_ERR_CONFIG;
    case ErrorKind::Io: return CP_ERR_IO;
    case ErrorKind::MalformedRow:
    case ErrorKind::UnknownStore:
    case ErrorKind::NonPositiveQuantity:
    case ErrorKind::OutOfRangeCoordinate:
    case ErrorKind::NonPositivePrice:
    case ErrorKind::NoDefinedSubcategory:
    case ErrorKind::UniverseTooSmall:
    case ErrorKind::AllZeroRevenue:
    case ErrorKind::NoCleanControls: return CP_ERR_DATA;
    case ErrorKind::EmptyPanel:
    case ErrorKind::RankDeficient:
    case ErrorKind::SingleCluster:
    case ErrorKind::UndefinedLimit:
    case ErrorKind::NonPositiveRho:
    case ErrorKind::NegativePSFactor: return CP_ERR_ESTIMATION;
    case ErrorKind::Internal: return CP_ERR_INTERNAL;
  }
  return CP_ERR_INTERNAL;
}

cp_status create_common(crimepass::config::PipelineConfig&& config, const char* output_dir,
                        cp_pipeline** out) {
  if (!output_dir || !out) {
    g_create_error = "null argument";
    return CP_ERR_INVALID;
  }
  *out = new cp_pipeline(std::move(config), output_dir);
  return CP_OK;
}

} // namespace

extern "C" {

const char* cp_version(void) { return "0.1.0"; }

cp_status cp_pipeline_create(const char* config_path, const char* output_dir, cp_pipeline** out) {
  if (out) *out = nullptr;
  if (!config_path) {
    g_create_error = "null config path";
    return CP_ERR_INVALID;
  }
  try {
    return create_common(crimepass::config::parse_file(config_path), output_dir, out);
  } catch (const Error& e) {
    g_create_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_create_error = e.what();
    return CP_ERR_INTERNAL;
  }
}

cp_status cp_pipeline_create_from_string(const char* config_json, const char* output_dir,
                                         cp_pipeline** out) {
  if (out) *out = nullptr;
  if (!config_json) {
    g_create_error = "null config string";
    return CP_ERR_INVALID;
  }
  try {
    return create_common(crimepass::config::parse(config_json), output_dir, out);
  } catch (const Error& e) {
    g_create_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_create_error = e.what();
    return CP_ERR_INTERNAL;
  }
}

cp_status cp_pipeline_set_threads(cp_pipeline* pipeline, int threads) {
  if (!pipeline) return CP_ERR_INVALID;
  pipeline->impl.set_threads(threads);
  return CP_OK;
}

cp_status cp_pipeline_run(cp_pipeline* pipeline, const char* stage) {
  if (!pipeline || !stage) return CP_ERR_INVALID;
  try {
    pipeline->last_error.clear();
    pipeline->impl.run(stage);
    return CP_OK;
  } catch (const Error& e) {
    pipeline->last_error = std::string(stage) + ": " + e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    pipeline->last_error = std::string(stage) + ": " + e.what();
    return CP_ERR_INTERNAL;
  }
}

const char* cp_pipeline_config_hash(const cp_pipeline* pipeline) {
  if (!pipeline) return "";
  return pipeline->impl.config().config_hash.c_str();
}

const char* cp_last_error(const cp_pipeline* pipeline) {
  return pipeline ? pipeline->last_error.c_str() : g_create_error.c_str();
}

void cp_pipeline_destroy(cp_pipeline* pipeline) { delete pipeline; }

} // extern "C"

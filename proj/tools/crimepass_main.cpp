// Command line front end; talks to the engine through the C API only.
#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "crimepass.h"

int main(int argc, char** argv) {
  CLI::App app{"crimepass: retail-crime price pass-through estimation engine"};
  app.set_version_flag("--version", cp_version());

  std::string stage;
  std::string config_path;
  std::string out_dir = "out";
  int threads = 0;

  app.add_option("stage", stage,
                 "pipeline stage: simulate, index, stack, estimate, passthrough, welfare, "
                 "report, or all")
      ->required();
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--out", out_dir, "output directory (default: out)");
  app.add_option("--threads", threads, "worker thread cap, 0 = hardware concurrency");

  CLI11_PARSE(app, argc, argv);

  cp_pipeline* pipeline = nullptr;
  cp_status status = cp_pipeline_create(config_path.c_str(), out_dir.c_str(), &pipeline);
  if (status != CP_OK) {
    std::fprintf(stderr, "error: %s\n", cp_last_error(nullptr));
    return 1;
  }
  cp_pipeline_set_threads(pipeline, threads);

  status = cp_pipeline_run(pipeline, stage.c_str());
  if (status != CP_OK) {
    std::fprintf(stderr, "error: %s\n", cp_last_error(pipeline));
    cp_pipeline_destroy(pipeline);
    return 1;
  }
  std::printf("%s: ok (config %s, artifacts in %s)\n", stage.c_str(),
              cp_pipeline_config_hash(pipeline), out_dir.c_str());
  cp_pipeline_destroy(pipeline);
  return 0;
}

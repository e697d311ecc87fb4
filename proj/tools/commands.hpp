#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace penetrance::cli {

struct CommonOptions {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;  // flag override; PENETRANCE_SEED wins
  int threads = 0;                    // 0 = hardware concurrency
};

struct FitOptions {
  std::string data_path;
  bool no_ascertainment_correction = false;
  bool no_frailty = false;
  std::string baseline;  // empty = config/default
  int degree = 0;        // 0 = config/default
  std::string resume_dir;
};

struct PredictOptions {
  std::string model_dir;
  std::string data_path;
  std::string counselee_id;  // empty = use counselee column
};

struct EvaluateOptions {
  std::string metric;  // cpo, dic, roc
  std::string model_dir;
  std::string data_path;
  double t_c = 50.0;
  int cause = 1;
  int repetitions = 0;  // 0 = config/default
  FitOptions fit;       // model options for roc refits
};

int cmd_simulate(const CommonOptions& common);
int cmd_fit(const CommonOptions& common, const FitOptions& fit);
int cmd_predict(const CommonOptions& common, const PredictOptions& predict);
int cmd_evaluate(const CommonOptions& common, const EvaluateOptions& evaluate);

}  // namespace penetrance::cli

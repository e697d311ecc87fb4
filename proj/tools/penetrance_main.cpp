#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "penetrance/common.hpp"

using penetrance::cli::CommonOptions;
using penetrance::cli::EvaluateOptions;
using penetrance::cli::FitOptions;
using penetrance::cli::PredictOptions;

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitNumeric = 70;

void add_common(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("--config", common.config_path, "configuration file");
  cmd->add_option("--out", common.out_path, "output file or directory");
  cmd->add_option("--seed", common.seed, "seed override");
  cmd->add_option("--threads", common.threads, "worker threads (0 = auto)");
}

void add_fit_options(CLI::App* cmd, FitOptions& fit) {
  cmd->add_flag("--no-ascertainment-correction",
                fit.no_ascertainment_correction,
                "fit without the ascertainment correction");
  cmd->add_flag("--no-frailty", fit.no_frailty,
                "fit without family frailty terms");
  cmd->add_option("--baseline", fit.baseline,
                  "baseline hazard family: bernstein, exponential, weibull, "
                  "piecewise");
  cmd->add_option("--degree", fit.degree, "Bernstein degree M");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "penetrance: Bayesian competing-risks penetrance estimation from "
      "family data"};
  app.require_subcommand(1);

  CommonOptions sim_common;
  CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic cohort");
  add_common(sim, sim_common);

  CommonOptions fit_common;
  FitOptions fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "sample the posterior");
  add_common(fit_cmd, fit_common);
  fit_cmd->add_option("--data", fit.data_path, "pedigree file")->required();
  add_fit_options(fit_cmd, fit);
  fit_cmd->add_option("--resume", fit.resume_dir,
                      "continue the chain from a previous fit directory");

  CommonOptions pred_common;
  PredictOptions pred;
  CLI::App* pred_cmd =
      app.add_subcommand("predict", "personalized risk prediction");
  add_common(pred_cmd, pred_common);
  pred_cmd->add_option("--model", pred.model_dir, "fit output directory")
      ->required();
  pred_cmd->add_option("--data", pred.data_path, "pedigree file")->required();
  pred_cmd->add_option("--counselee", pred.counselee_id,
                       "counselee individual id");

  CommonOptions eval_common;
  EvaluateOptions eval;
  CLI::App* eval_cmd =
      app.add_subcommand("evaluate", "model comparison and validation");
  add_common(eval_cmd, eval_common);
  eval_cmd->require_subcommand(1);
  for (const char* metric : {"cpo", "dic", "roc"}) {
    CLI::App* sub = eval_cmd->add_subcommand(metric);
    add_common(sub, eval_common);
    sub->add_option("--model", eval.model_dir, "fit output directory");
    sub->add_option("--data", eval.data_path, "pedigree file")->required();
    if (std::string(metric) == "roc") {
      sub->add_option("--tc", eval.t_c, "prediction age in years");
      sub->add_option("--cause", eval.cause, "cause index (1-based)");
      sub->add_option("--repetitions", eval.repetitions,
                      "random half-split repetitions");
      add_fit_options(sub, eval.fit);
    }
  }

  try {
    app.parse(argc, argv);
    if (sim->parsed()) return penetrance::cli::cmd_simulate(sim_common);
    if (fit_cmd->parsed()) return penetrance::cli::cmd_fit(fit_common, fit);
    if (pred_cmd->parsed()) {
      return penetrance::cli::cmd_predict(pred_common, pred);
    }
    if (eval_cmd->parsed()) {
      for (CLI::App* sub : eval_cmd->get_subcommands()) {
        eval.metric = sub->get_name();
      }
      return penetrance::cli::cmd_evaluate(eval_common, eval);
    }
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  } catch (const penetrance::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const penetrance::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const penetrance::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

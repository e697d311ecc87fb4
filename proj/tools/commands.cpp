#include "commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "penetrance/common.hpp"
#include "penetrance/config.hpp"
#include "penetrance/evaluate.hpp"
#include "penetrance/inference.hpp"
#include "penetrance/io.hpp"
#include "penetrance/pedigree.hpp"
#include "penetrance/predict.hpp"
#include "penetrance/simulate.hpp"

namespace fs = std::filesystem;

namespace penetrance::cli {

namespace {

std::uint64_t resolve_seed(const CommonOptions& common, const Config& cfg) {
  if (const char* env = std::getenv("PENETRANCE_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  if (common.seed) return *common.seed;
  return cfg.get_seed("seed", 1);
}

int resolve_threads(const CommonOptions& common, const Config& cfg) {
  int t = common.threads > 0 ? common.threads : cfg.get_int("threads", 0);
  if (t <= 0) {
    t = static_cast<int>(std::thread::hardware_concurrency());
    if (t <= 0) t = 1;
  }
  return t;
}

Config load_config(const CommonOptions& common) {
  if (common.config_path.empty()) return Config();
  return Config::load(common.config_path);
}

SimulationConfig simulation_config(const Config& cfg, std::uint64_t seed,
                                   int threads) {
  SimulationConfig sim;
  sim.family_count = cfg.get_int("simulate.family_count", 200);
  sim.beta = cfg.get_doubles("simulate.beta", {4.0, 10.0});
  sim.hazard = cfg.get_doubles("simulate.hazard", {0.1, 0.0005});
  sim.frailty = cfg.get_bool("simulate.frailty", true);
  sim.frailty_shape = cfg.get_double("simulate.frailty_shape", 0.25);
  sim.censor_rate = cfg.get_double("simulate.censor_rate", 2.0);
  sim.proband_carrier_freq =
      cfg.get_double("simulate.proband_carrier_freq", 0.0001);
  sim.missing_fraction = cfg.get_double("simulate.missing_fraction", 0.5);
  sim.ascertainment_cause = cfg.get_int("simulate.ascertainment_cause", 2);
  sim.max_attempts_per_family =
      cfg.get_long("simulate.max_attempts", 10000000);
  sim.seed = seed;
  sim.threads = threads;
  return sim;
}

std::vector<CovTerm> parse_terms(const std::string& text) {
  std::vector<CovTerm> terms;
  for (const std::string& part : split(text, ',')) {
    const std::string t = trim(part);
    if (t == "G") terms.push_back(CovTerm::kCarrier);
    else if (t == "X") terms.push_back(CovTerm::kMale);
    else if (t == "GxX" || t == "GX") terms.push_back(CovTerm::kInteraction);
    else if (!t.empty()) throw DataError("unknown covariate term: " + t);
  }
  if (terms.empty()) throw DataError("empty covariate list");
  return terms;
}

// Model layout from config plus command-line overrides. K falls back to the
// largest cause code in the data.
ModelSpec spec_from_config(const Config& cfg, const FitOptions& fit,
                           int inferred_causes) {
  ModelSpec spec;
  spec.cause_count = cfg.get_int("model.causes", inferred_causes);
  if (spec.cause_count < 1) throw DataError("model.causes must be >= 1");

  const std::string base_kind =
      !fit.baseline.empty() ? fit.baseline
                            : cfg.get("model.baseline", "bernstein");
  spec.baseline.kind = baseline_kind_from_string(base_kind);
  int degree = fit.degree > 0 ? fit.degree
                              : cfg.get_int("model.bernstein_degree", 5);
  switch (spec.baseline.kind) {
    case BaselineKind::kBernstein:
      spec.baseline.param_count = degree;
      break;
    case BaselineKind::kExponential:
      spec.baseline.param_count = 1;
      break;
    case BaselineKind::kWeibull:
      spec.baseline.param_count = 2;
      break;
    case BaselineKind::kPiecewiseConstant:
      spec.baseline.param_count = cfg.get_int("model.piecewise_bins", 5);
      break;
  }

  spec.frailty = cfg.get_bool("model.frailty", true) && !fit.no_frailty;
  spec.correct_ascertainment =
      cfg.get_bool("model.correct_ascertainment", true) &&
      !fit.no_ascertainment_correction;
  spec.rule.qualifying_cause = cfg.get_int("model.ascertainment_cause", 2);
  spec.allele_freq = cfg.get_double("allele_frequency", 0.0006);

  const std::string default_cov = cfg.get("model.covariates", "G,X,GxX");
  for (int k = 1; k <= spec.cause_count; ++k) {
    const std::string sect = "cause." + std::to_string(k);
    CauseDesign design;
    // Default structural constraint: cause 1 has zero hazard for males
    // unless the config says otherwise.
    std::string zero = cfg.get(sect + ".zero_hazard_sex", k == 1 ? "M" : "none");
    if (zero == "M" || zero == "F") {
      design.zero_hazard = ZeroHazardRule{
          zero == "M" ? Sex::kMale : Sex::kFemale, std::nullopt};
    } else if (zero != "none") {
      throw DataError("config " + sect + ".zero_hazard_sex must be M, F or none");
    }
    const std::string cov_default =
        design.zero_hazard ? std::string("G") : default_cov;
    design.terms = parse_terms(cfg.get(sect + ".covariates", cov_default));
    spec.designs.push_back(std::move(design));
  }
  return spec;
}

PriorSpec priors_from_config(const Config& cfg) {
  PriorSpec priors;
  priors.beta_sd = cfg.get_double("fit.beta_prior_sd", 10.0);
  const std::string gp = cfg.get("fit.gamma_prior", "flat");
  if (gp == "flat") {
    priors.coef_flat = true;
  } else {
    const auto parts = Config::from_string("v = " + gp).get_doubles("v", {});
    if (parts.size() != 2) {
      throw DataError("fit.gamma_prior must be 'flat' or 'a,b'");
    }
    priors.coef_flat = false;
    priors.coef_a = parts[0];
    priors.coef_b = parts[1];
  }
  const auto nu = cfg.get_doubles("fit.nu_prior", {0.01, 0.01});
  if (nu.size() != 2) throw DataError("fit.nu_prior must be 'a,b'");
  priors.nu_a = nu[0];
  priors.nu_b = nu[1];
  return priors;
}

SamplerConfig sampler_from_config(const Config& cfg, std::uint64_t seed,
                                  int threads) {
  SamplerConfig sc;
  sc.iterations = cfg.get_long("fit.iterations", 100000);
  sc.burn_in = cfg.get_long("fit.burn_in", 10000);
  sc.thin = cfg.get_int("fit.thin", 5);
  sc.chains = cfg.get_int("fit.chains", 1);
  sc.prior_only = cfg.get_bool("fit.prior_only", false);
  sc.seed = seed;
  sc.threads = threads;
  return sc;
}

int max_cause_in(const std::vector<Pedigree>& peds) {
  int k = 1;
  for (const Pedigree& p : peds) {
    for (const Individual& m : p.members()) {
      k = std::max(k, m.phenotype.cause);
    }
  }
  return k;
}

nlohmann::json manifest_base(const std::string& command,
                             const CommonOptions& common, std::uint64_t seed,
                             int threads, const Config& cfg) {
  nlohmann::json m;
  m["tool"] = "penetrance";
  m["version"] = kVersion;
  m["command"] = command;
  m["seed"] = seed;
  m["threads"] = threads;
  m["config_digest"] = to_hex(fnv1a64(cfg.text()));
  m["inputs"] = nlohmann::json::object();
  if (!common.config_path.empty()) {
    m["inputs"][common.config_path] =
        to_hex(fnv1a64(read_file(common.config_path)));
  }
  return m;
}

void add_input_digest(nlohmann::json& manifest, const std::string& path) {
  manifest["inputs"][path] = to_hex(fnv1a64(read_file(path)));
}

void write_manifest(const fs::path& dir, const nlohmann::json& manifest) {
  write_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
}

}  // namespace

int cmd_simulate(const CommonOptions& common) {
  const Config cfg = load_config(common);
  const std::uint64_t seed = resolve_seed(common, cfg);
  const int threads = resolve_threads(common, cfg);
  const SimulationConfig sim = simulation_config(cfg, seed, threads);

  const auto cohort = simulate_cohort(sim);
  if (common.out_path.empty()) throw UsageError("--out is required");
  const fs::path out(common.out_path);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_pedigree_file(out.string(), cohort);

  nlohmann::json manifest = manifest_base("simulate", common, seed, threads, cfg);
  manifest["outputs"] = {out.filename().string()};
  manifest["families"] = sim.family_count;
  write_file(out.string() + ".manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << cohort.size() << " families to " << out.string()
            << "\n";
  return 0;
}

int cmd_fit(const CommonOptions& common, const FitOptions& fit) {
  const Config cfg = load_config(common);
  const std::uint64_t seed = resolve_seed(common, cfg);
  const int threads = resolve_threads(common, cfg);
  if (common.out_path.empty()) throw UsageError("--out is required");
  if (fit.data_path.empty()) throw UsageError("--data is required");

  auto pedigrees = load_pedigree_file(fit.data_path);
  const double censor_age = cfg.get_double("model.censor_age", 75.0);
  pedigrees = apply_administrative_censoring(std::move(pedigrees), censor_age);

  ModelSpec spec = spec_from_config(cfg, fit, max_cause_in(pedigrees));
  CohortData data = CohortData::build(std::move(pedigrees), spec);
  const PriorSpec priors = priors_from_config(cfg);
  SamplerConfig sampler = sampler_from_config(cfg, seed, threads);

  const fs::path dir(common.out_path);
  fs::create_directories(dir);

  ChainResult result;
  if (!fit.resume_dir.empty()) {
    if (sampler.chains != 1) {
      throw UsageError("--resume supports a single chain");
    }
    const auto j = nlohmann::json::parse(
        read_file((fs::path(fit.resume_dir) / "checkpoint.json").string()));
    const ChainCheckpoint checkpoint = checkpoint_from_json(j);
    result = run_chain(data, priors, sampler, &checkpoint, 0);
    // Prepend the draws already collected by the interrupted run.
    const PosteriorSamples prev = read_draws_file(
        (fs::path(fit.resume_dir) / "draws.tsv").string());
    PosteriorSamples merged = result.samples;
    merged.draws = prev.draws;
    merged.chain = prev.chain;
    merged.log_posterior = prev.log_posterior;
    merged.draws.insert(merged.draws.end(), result.samples.draws.begin(),
                        result.samples.draws.end());
    merged.chain.insert(merged.chain.end(), result.samples.chain.begin(),
                        result.samples.chain.end());
    merged.log_posterior.insert(merged.log_posterior.end(),
                                result.samples.log_posterior.begin(),
                                result.samples.log_posterior.end());
    result.samples = std::move(merged);
  } else {
    result = run_chains(data, priors, sampler);
  }

  write_draws_file((dir / "draws.tsv").string(), result.samples);
  write_file((dir / "checkpoint.json").string(),
             checkpoint_to_json(result.checkpoint).dump() + "\n");

  // Summary table in the Mean / SD / 2.5% / 97.5% layout.
  {
    std::ofstream out(dir / "summary.tsv");
    out << "parameter\tmean\tsd\tq2.5\tq97.5\trhat\tacceptance\n";
    const auto rows = summarize(result.samples, 0.95);
    for (size_t i = 0; i < rows.size(); ++i) {
      out << rows[i].name << '\t' << format_double(rows[i].mean) << '\t'
          << format_double(rows[i].sd) << '\t' << format_double(rows[i].q_lo)
          << '\t' << format_double(rows[i].q_hi) << '\t'
          << format_double(rows[i].rhat) << '\t'
          << format_double(result.samples.acceptance[i]) << '\n';
    }
  }

  nlohmann::json model;
  model["model"] = model_spec_to_json(result.samples.spec);
  model["family_ids"] = result.samples.family_ids;
  model["frailty_fitted"] = result.samples.frailty_fitted;
  write_file((dir / "model.json").string(), model.dump(2) + "\n");

  // Penetrance curves per cause and covariate cell.
  const int curve_draws = cfg.get_int("fit.curve_draws", 200);
  if (curve_draws > 0) {
    const double ts = result.samples.spec.time_scale;
    const double age_max = std::min(cfg.get_double("fit.age_max", 75.0), ts);
    const double age_step =
        cfg.get_double("fit.age_step", age_max > 0 ? age_max / 75.0 : 1.0);
    std::vector<double> ages;
    for (double a = 0.0; a <= age_max + 1e-9; a += age_step) ages.push_back(a);
    std::ofstream out(dir / "penetrance.tsv");
    out << "cause\tG\tX\tage_years\tq_mean\tq_lo\tq_hi\n";
    for (int k = 1; k <= result.samples.spec.cause_count; ++k) {
      for (int g = 0; g < 2; ++g) {
        for (int male = 0; male < 2; ++male) {
          const Sex sex = male ? Sex::kMale : Sex::kFemale;
          const PenetranceCurve curve = penetrance_posterior(
              result.samples, k, g, sex, ages, 0.95, curve_draws);
          for (size_t i = 0; i < curve.ages.size(); ++i) {
            out << k << '\t' << g << '\t' << (male ? 'M' : 'F') << '\t'
                << format_double(curve.ages[i]) << '\t'
                << format_double(curve.mean[i]) << '\t'
                << format_double(curve.lo[i]) << '\t'
                << format_double(curve.hi[i]) << '\n';
          }
        }
      }
    }
  }

  nlohmann::json manifest = manifest_base("fit", common, seed, threads, cfg);
  add_input_digest(manifest, fit.data_path);
  manifest["outputs"] = {"draws.tsv", "summary.tsv", "model.json",
                         "checkpoint.json", "penetrance.tsv"};
  manifest["families"] = data.family_count();
  manifest["time_scale"] = result.samples.spec.time_scale;
  write_manifest(dir, manifest);
  std::cout << "fit complete: " << result.samples.draw_count()
            << " retained draws over " << data.family_count() << " families\n";
  return 0;
}

namespace {

PosteriorSamples load_model_dir(const std::string& model_dir) {
  const fs::path dir(model_dir);
  const auto j = nlohmann::json::parse(read_file((dir / "model.json").string()));
  PosteriorSamples samples = read_draws_file((dir / "draws.tsv").string());
  samples.spec = model_spec_from_json(j.at("model"));
  samples.frailty_fitted = j.at("frailty_fitted").get<bool>();
  samples.family_ids = j.at("family_ids").get<std::vector<std::string>>();
  return samples;
}

}  // namespace

int cmd_predict(const CommonOptions& common, const PredictOptions& predict) {
  const Config cfg = load_config(common);
  const std::uint64_t seed = resolve_seed(common, cfg);
  if (common.out_path.empty()) throw UsageError("--out is required");
  if (predict.model_dir.empty() || predict.data_path.empty()) {
    throw UsageError("--model and --data are required");
  }

  const PosteriorSamples samples = load_model_dir(predict.model_dir);
  const auto pedigrees = load_pedigree_file(predict.data_path);

  // Locate the counselee: by id flag, else by the counselee column.
  const Pedigree* family = nullptr;
  int member = -1;
  if (!predict.counselee_id.empty()) {
    for (const Pedigree& p : pedigrees) {
      if (auto idx = p.index_of(predict.counselee_id)) {
        family = &p;
        member = *idx;
        break;
      }
    }
    if (!family) {
      throw UsageError("counselee id '" + predict.counselee_id +
                       "' not found in " + predict.data_path);
    }
  } else {
    for (const Pedigree& p : pedigrees) {
      for (int j = 0; j < p.size(); ++j) {
        if (p.member(j).counselee) {
          if (family) throw DataError("multiple counselee flags in input");
          family = &p;
          member = j;
        }
      }
    }
    if (!family) {
      throw UsageError("no counselee: pass --counselee or set the counselee column");
    }
  }

  const FrailtyMode mode =
      frailty_mode_from_string(cfg.get("predict.frailty_mode", "integrate"));
  const int max_draws = cfg.get_int("predict.max_draws", 500);
  const double ts = samples.spec.time_scale;
  const double age_max = std::min(cfg.get_double("predict.age_max", 75.0), ts);
  const double age_step =
      cfg.get_double("predict.age_step", age_max > 0 ? age_max / 75.0 : 1.0);
  std::vector<double> ages;
  for (double a = 0.0; a <= age_max + 1e-9; a += age_step) ages.push_back(a);

  const fs::path dir(common.out_path);
  fs::create_directories(dir);
  std::ofstream risk_out(dir / "risk.tsv");
  risk_out << "cause\tage_years\trisk_mean\trisk_lo\trisk_hi\n";
  std::array<double, 2> weights{0.0, 0.0};
  for (int k = 1; k <= samples.spec.cause_count; ++k) {
    const RiskPrediction pred =
        predict_risk(*family, member, k, ages, samples, mode, seed, max_draws);
    weights = pred.mean_carrier_weights;
    for (size_t i = 0; i < pred.ages.size(); ++i) {
      risk_out << k << '\t' << format_double(pred.ages[i]) << '\t'
               << format_double(pred.mean[i]) << '\t'
               << format_double(pred.lo[i]) << '\t'
               << format_double(pred.hi[i]) << '\n';
    }
  }
  {
    std::ofstream carrier_out(dir / "carrier.tsv");
    carrier_out << "member\tpr_noncarrier\tpr_carrier\n";
    carrier_out << family->member(member).id << '\t'
                << format_double(weights[0]) << '\t'
                << format_double(weights[1]) << '\n';
  }

  nlohmann::json manifest =
      manifest_base("predict", common, seed, 1, cfg);
  add_input_digest(manifest, predict.data_path);
  manifest["model_dir"] = predict.model_dir;
  manifest["counselee"] = family->member(member).id;
  manifest["outputs"] = {"risk.tsv", "carrier.tsv"};
  write_manifest(dir, manifest);
  std::cout << "predicted risks for counselee " << family->member(member).id
            << " (family " << family->family_id() << ")\n";
  return 0;
}

int cmd_evaluate(const CommonOptions& common, const EvaluateOptions& evaluate) {
  const Config cfg = load_config(common);
  const std::uint64_t seed = resolve_seed(common, cfg);
  const int threads = resolve_threads(common, cfg);
  if (common.out_path.empty()) throw UsageError("--out is required");
  if (evaluate.data_path.empty()) throw UsageError("--data is required");

  const fs::path dir(common.out_path);
  fs::create_directories(dir);
  nlohmann::json manifest =
      manifest_base("evaluate " + evaluate.metric, common, seed, threads, cfg);
  add_input_digest(manifest, evaluate.data_path);

  if (evaluate.metric == "cpo" || evaluate.metric == "dic") {
    if (evaluate.model_dir.empty()) throw UsageError("--model is required");
    const PosteriorSamples samples = load_model_dir(evaluate.model_dir);
    auto pedigrees = load_pedigree_file(evaluate.data_path);
    pedigrees = apply_administrative_censoring(
        std::move(pedigrees), cfg.get_double("model.censor_age", 75.0));
    // The draws carry per-family frailties, so the evaluation data must be
    // the fitted cohort itself, in the same family order.
    std::vector<std::string> ids;
    for (const Pedigree& p : pedigrees) ids.push_back(p.family_id());
    if (ids != samples.family_ids) {
      throw DataError("evaluate data families do not match the fitted model");
    }
    ModelSpec spec = samples.spec;
    CohortData data = CohortData::build(std::move(pedigrees), spec);
    if (std::abs(data.spec().time_scale - samples.spec.time_scale) >
        1e-9 * samples.spec.time_scale) {
      throw DataError("evaluate data time scale differs from the fitted model");
    }

    if (evaluate.metric == "cpo") {
      std::ofstream out(dir / "cpo.tsv");
      out << "family_id\tlog_cpo\tcpo\n";
      double total = 0.0;
      for (int i = 0; i < data.family_count(); ++i) {
        const double lc = family_log_cpo(data, samples, i);
        total += lc;
        out << data.family(i).pedigree.family_id() << '\t'
            << format_double(lc) << '\t' << format_double(std::exp(lc)) << '\n';
      }
      out << "psml\t" << format_double(total) << "\t\n";
      manifest["outputs"] = {"cpo.tsv"};
      std::cout << "psml " << total << "\n";
    } else {
      const double d = dic(data, samples);
      std::ofstream out(dir / "dic.tsv");
      out << "metric\tvalue\n";
      out << "dic\t" << format_double(d) << '\n';
      manifest["outputs"] = {"dic.tsv"};
      std::cout << "dic " << d << "\n";
    }
  } else if (evaluate.metric == "roc") {
    auto pedigrees = load_pedigree_file(evaluate.data_path);
    pedigrees = apply_administrative_censoring(
        std::move(pedigrees), cfg.get_double("model.censor_age", 75.0));
    CrossValidationConfig cv;
    cv.t_c_years = evaluate.t_c;
    cv.cause = evaluate.cause;
    cv.repetitions = evaluate.repetitions > 0
                         ? evaluate.repetitions
                         : cfg.get_int("evaluate.repetitions", 20);
    cv.seed = seed;
    cv.priors = priors_from_config(cfg);
    cv.sampler = sampler_from_config(cfg, seed, threads);
    cv.spec = spec_from_config(cfg, evaluate.fit, max_cause_in(pedigrees));
    cv.frailty_mode =
        frailty_mode_from_string(cfg.get("predict.frailty_mode", "integrate"));
    cv.prediction_draws = cfg.get_int("evaluate.prediction_draws", 200);

    const CrossValidationResult result = cross_validated_roc(pedigrees, cv);
    std::ofstream out(dir / "roc.tsv");
    out << "psi\tfpr\ttpr\trep\n";
    for (size_t r = 0; r < result.curves.size(); ++r) {
      for (const RocPoint& pt : result.curves[r].points) {
        out << format_double(pt.threshold) << '\t' << format_double(pt.fpr)
            << '\t' << format_double(pt.tpr) << '\t' << r << '\n';
      }
    }
    out << "auc\t" << format_double(result.mean_auc) << '\t'
        << format_double(result.sd_auc) << "\t\n";
    manifest["outputs"] = {"roc.tsv"};
    std::cout << "auc " << result.mean_auc << " (sd " << result.sd_auc << ")\n";
  } else {
    throw UsageError("unknown evaluate metric: " + evaluate.metric);
  }

  write_manifest(dir, manifest);
  return 0;
}

}  // namespace penetrance::cli

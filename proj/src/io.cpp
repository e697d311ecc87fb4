#include "penetrance/io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "penetrance/common.hpp"

namespace penetrance {

std::string to_hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

std::vector<std::string> split(std::string_view line, char delim) {
  std::vector<std::string> out;
  size_t start = 0;
  for (size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == delim) {
      out.emplace_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << content;
}

void write_draws_file(const std::string& path, const PosteriorSamples& samples) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write draws file: " + path);
  out << "chain\tlog_posterior";
  for (const std::string& name : samples.names) out << '\t' << name;
  out << '\n';
  const int n = samples.draw_count();
  for (int d = 0; d < n; ++d) {
    out << samples.chain[d] << '\t' << format_double(samples.log_posterior[d]);
    for (int p = 0; p < samples.param_count(); ++p) {
      out << '\t' << format_double(samples.value(d, p));
    }
    out << '\n';
  }
}

PosteriorSamples read_draws_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open draws file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw DataError("empty draws file: " + path);
  const auto cols = split(header, '\t');
  if (cols.size() < 3 || cols[0] != "chain" || cols[1] != "log_posterior") {
    throw DataError("draws file header must start with chain, log_posterior");
  }
  PosteriorSamples samples;
  samples.names.assign(cols.begin() + 2, cols.end());
  std::string line;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != cols.size()) {
      throw DataError("draws file row " + std::to_string(row) +
                      ": column count mismatch");
    }
    auto num = [&](const std::string& s) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) {
        throw DataError("draws file row " + std::to_string(row) +
                        ": bad number '" + s + "'");
      }
      return v;
    };
    samples.chain.push_back(static_cast<int>(num(fields[0])));
    samples.log_posterior.push_back(num(fields[1]));
    for (size_t i = 2; i < fields.size(); ++i) {
      samples.draws.push_back(num(fields[i]));
    }
  }
  return samples;
}

namespace {

nlohmann::json design_to_json(const CauseDesign& d) {
  nlohmann::json j;
  j["terms"] = nlohmann::json::array();
  for (CovTerm t : d.terms) {
    switch (t) {
      case CovTerm::kCarrier:
        j["terms"].push_back("G");
        break;
      case CovTerm::kMale:
        j["terms"].push_back("X");
        break;
      case CovTerm::kInteraction:
        j["terms"].push_back("GxX");
        break;
    }
  }
  if (d.zero_hazard) {
    nlohmann::json z;
    if (d.zero_hazard->sex) {
      z["sex"] = *d.zero_hazard->sex == Sex::kMale ? "M" : "F";
    }
    if (d.zero_hazard->carrier) z["carrier"] = *d.zero_hazard->carrier;
    j["zero_hazard"] = z;
  }
  return j;
}

CauseDesign design_from_json(const nlohmann::json& j) {
  CauseDesign d;
  d.terms.clear();
  for (const auto& t : j.at("terms")) {
    const std::string s = t.get<std::string>();
    if (s == "G") d.terms.push_back(CovTerm::kCarrier);
    else if (s == "X") d.terms.push_back(CovTerm::kMale);
    else if (s == "GxX") d.terms.push_back(CovTerm::kInteraction);
    else throw DataError("unknown covariate term: " + s);
  }
  if (j.contains("zero_hazard")) {
    ZeroHazardRule rule;
    const auto& z = j.at("zero_hazard");
    if (z.contains("sex")) {
      rule.sex = z.at("sex").get<std::string>() == "M" ? Sex::kMale : Sex::kFemale;
    }
    if (z.contains("carrier")) rule.carrier = z.at("carrier").get<int>();
    d.zero_hazard = rule;
  }
  return d;
}

}  // namespace

nlohmann::json model_spec_to_json(const ModelSpec& spec) {
  nlohmann::json j;
  j["cause_count"] = spec.cause_count;
  j["designs"] = nlohmann::json::array();
  for (const CauseDesign& d : spec.designs) j["designs"].push_back(design_to_json(d));
  j["baseline"] = {{"kind", to_string(spec.baseline.kind)},
                   {"param_count", spec.baseline.param_count}};
  j["frailty"] = spec.frailty;
  j["correct_ascertainment"] = spec.correct_ascertainment;
  j["ascertainment_cause"] = spec.rule.qualifying_cause;
  j["allele_frequency"] = spec.allele_freq;
  j["time_scale"] = spec.time_scale;
  return j;
}

ModelSpec model_spec_from_json(const nlohmann::json& j) {
  ModelSpec spec;
  spec.cause_count = j.at("cause_count").get<int>();
  spec.designs.clear();
  for (const auto& d : j.at("designs")) spec.designs.push_back(design_from_json(d));
  spec.baseline.kind =
      baseline_kind_from_string(j.at("baseline").at("kind").get<std::string>());
  spec.baseline.param_count = j.at("baseline").at("param_count").get<int>();
  spec.frailty = j.at("frailty").get<bool>();
  spec.correct_ascertainment = j.at("correct_ascertainment").get<bool>();
  spec.rule.qualifying_cause = j.at("ascertainment_cause").get<int>();
  spec.allele_freq = j.at("allele_frequency").get<double>();
  spec.time_scale = j.at("time_scale").get<double>();
  return spec;
}

nlohmann::json checkpoint_to_json(const ChainCheckpoint& cp) {
  nlohmann::json j;
  j["iteration"] = cp.iteration;
  j["rng"] = cp.rng;
  j["scales"] = cp.scales;
  j["accept_sum"] = cp.accept_sum;
  j["counts"] = cp.counts;
  nlohmann::json state;
  state["beta"] = cp.state.beta;
  state["coef"] = cp.state.coef;
  state["nu"] = cp.state.nu;
  state["xi"] = cp.state.xi;
  j["state"] = state;
  return j;
}

ChainCheckpoint checkpoint_from_json(const nlohmann::json& j) {
  ChainCheckpoint cp;
  cp.iteration = j.at("iteration").get<long>();
  cp.rng = j.at("rng").get<std::string>();
  cp.scales = j.at("scales").get<std::vector<double>>();
  cp.accept_sum = j.at("accept_sum").get<std::vector<double>>();
  cp.counts = j.at("counts").get<std::vector<long>>();
  const auto& state = j.at("state");
  cp.state.beta = state.at("beta").get<std::vector<std::vector<double>>>();
  cp.state.coef = state.at("coef").get<std::vector<std::vector<double>>>();
  cp.state.nu = state.at("nu").get<std::vector<double>>();
  cp.state.xi = state.at("xi").get<std::vector<std::vector<double>>>();
  return cp;
}

}  // namespace penetrance

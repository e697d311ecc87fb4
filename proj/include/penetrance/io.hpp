#pragma once

#include <string>

#include <json.hpp>

#include "penetrance/inference.hpp"

namespace penetrance {

// Shortest round-trip decimal representation.
std::string format_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Posterior draws as delimited text: chain, log_posterior, then one column
// per scalar parameter. Reading fills draws/chain/log_posterior/names; the
// model metadata travels separately (model.json).
void write_draws_file(const std::string& path, const PosteriorSamples& samples);
PosteriorSamples read_draws_file(const std::string& path);

nlohmann::json model_spec_to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);

nlohmann::json checkpoint_to_json(const ChainCheckpoint& cp);
ChainCheckpoint checkpoint_from_json(const nlohmann::json& j);

}  // namespace penetrance

#pragma once

#include <string>

#include "json.hpp"

#include "gtms/mps.hpp"
#include "gtms/model.hpp"

namespace gtms {

using json = nlohmann::json;

json to_json(const NetworkShape& shape);
NetworkShape shape_from_json(const json& j);

// Versioned weight document: {"format_version":1,"shape":{...},"weights":{...}}
// with every complex number serialized as [re, im].
json to_json(const NetworkShape& shape, const GtmsWeights& weights);
GtmsWeights weights_from_json(const json& j, NetworkShape* shape_out = nullptr);

json to_json(const NetworkShape& shape, const TiedWeights& tied);
TiedWeights tied_from_json(const json& j, NetworkShape* shape_out = nullptr);

json to_json(const BlockWeights& block);
BlockWeights block_from_json(const json& j);

void save_json(const json& j, const std::string& path);
json load_json(const std::string& path);

}  // namespace gtms

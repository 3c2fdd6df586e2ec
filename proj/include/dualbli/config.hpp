#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dualbli/embeddings.hpp"
#include "dualbli/trainer.hpp"

namespace dualbli {

// Everything a run needs beyond the input files.
struct RunSettings {
  TrainConfig train;
  NormalizeScheme normalize = NormalizeScheme::unit;
  std::optional<std::size_t> max_vocab;
  std::size_t refine_rounds = 5;
  std::size_t refine_dict_size = 10000;
};

using KeyValues = std::map<std::string, std::string>;

// Plain "key=value" lines; '#' starts a comment, blank lines are ignored.
// Malformed lines and repeated keys are DataErrors carrying the line number.
KeyValues parse_key_values(const std::string& text, const std::string& origin = "config");
KeyValues load_key_values(const std::string& path);

// Applies each entry to settings. Unknown keys and unparsable values are
// DataErrors naming the key.
void apply_settings(RunSettings& settings, const KeyValues& values);

// Known keys, in manifest order.
const std::vector<std::string>& setting_keys();

// Every resolved setting as key=value lines, in setting_keys() order.
std::string render_settings(const RunSettings& settings);

}  // namespace dualbli

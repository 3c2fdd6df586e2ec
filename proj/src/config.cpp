#include "dualbli/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "dualbli/text_matrix.hpp"

namespace dualbli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  if (!parse_number(value, out)) throw DataError("setting '" + key + "' expects a number, got '" + value + "'");
  return out;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (value.empty() || ec != std::errc() || ptr != end) {
    throw DataError("setting '" + key + "' expects a nonnegative integer, got '" + value + "'");
  }
  return out;
}

std::string real_text(double v) { return format_number(v, 17); }

struct Setting {
  std::string key;
  std::function<void(RunSettings&, const std::string&)> set;
  std::function<std::string(const RunSettings&)> get;
};

#define SIZE_SETTING(name, field)                                                                    \
  Setting {                                                                                          \
    name, [](RunSettings& s, const std::string& v) { s.field = static_cast<std::size_t>(to_unsigned(name, v)); }, \
        [](const RunSettings& s) { return std::to_string(s.field); }                                 \
  }
#define REAL_SETTING(name, field)                                                           \
  Setting {                                                                                 \
    name, [](RunSettings& s, const std::string& v) { s.field = to_real(name, v); },         \
        [](const RunSettings& s) { return real_text(s.field); }                             \
  }

const std::vector<Setting>& settings_table() {
  static const std::vector<Setting> table = {
      SIZE_SETTING("epochs", train.epochs),
      SIZE_SETTING("iterations_per_epoch", train.iterations_per_epoch),
      SIZE_SETTING("batch_size", train.batch_size),
      SIZE_SETTING("disc_steps_per_gen_step", train.disc_steps_per_gen_step),
      REAL_SETTING("lr_generator", train.lr_generator),
      REAL_SETTING("lr_discriminator", train.lr_discriminator),
      REAL_SETTING("lr_decay", train.lr_decay),
      REAL_SETTING("lr_shrink_on_plateau", train.lr_shrink_on_plateau),
      REAL_SETTING("cycle_weight", train.cycle_weight),
      REAL_SETTING("orthogonalize_beta", train.orthogonalize_beta),
      SIZE_SETTING("most_frequent_for_disc", train.most_frequent_for_disc),
      Setting{"seed", [](RunSettings& s, const std::string& v) { s.train.seed = to_unsigned("seed", v); },
              [](const RunSettings& s) { return std::to_string(s.train.seed); }},
      Setting{"map_init",
              [](RunSettings& s, const std::string& v) {
                if (v == "identity") {
                  s.train.map_init = MapInit::identity;
                } else if (v == "random") {
                  s.train.map_init = MapInit::random;
                } else {
                  throw DataError("setting 'map_init' expects identity or random, got '" + v + "'");
                }
              },
              [](const RunSettings& s) {
                return std::string(s.train.map_init == MapInit::identity ? "identity" : "random");
              }},
      Setting{"disc_hidden_dim",
              [](RunSettings& s, const std::string& v) {
                s.train.discriminator.hidden_dim = static_cast<Eigen::Index>(to_unsigned("disc_hidden_dim", v));
              },
              [](const RunSettings& s) { return std::to_string(s.train.discriminator.hidden_dim); }},
      REAL_SETTING("disc_leaky_slope", train.discriminator.leaky_slope),
      REAL_SETTING("disc_input_dropout", train.discriminator.input_dropout),
      REAL_SETTING("disc_hidden_dropout", train.discriminator.hidden_dropout),
      REAL_SETTING("disc_smoothing", train.discriminator.smoothing),
      REAL_SETTING("selection_lambda", train.selection.lambda),
      SIZE_SETTING("selection_eval_vocab", train.selection.eval_vocab),
      SIZE_SETTING("csls_k", train.selection.k),
      Setting{"normalize",
              [](RunSettings& s, const std::string& v) {
                try {
                  s.normalize = parse_normalize_scheme(v);
                } catch (const DataError&) {
                  throw DataError("setting 'normalize' expects unit or center_then_unit, got '" + v + "'");
                }
              },
              [](const RunSettings& s) { return to_string(s.normalize); }},
      Setting{"max_vocab",
              [](RunSettings& s, const std::string& v) {
                if (v == "all") {
                  s.max_vocab.reset();
                } else {
                  s.max_vocab = static_cast<std::size_t>(to_unsigned("max_vocab", v));
                }
              },
              [](const RunSettings& s) { return s.max_vocab ? std::to_string(*s.max_vocab) : std::string("all"); }},
      SIZE_SETTING("refine_rounds", refine_rounds),
      SIZE_SETTING("refine_dict_size", refine_dict_size),
  };
  return table;
}

#undef SIZE_SETTING
#undef REAL_SETTING

}  // namespace

KeyValues parse_key_values(const std::string& text, const std::string& origin) {
  KeyValues out;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + " line " + std::to_string(line_no);
    if (eq == std::string_view::npos) throw DataError(where + ": expected key=value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw DataError(where + ": empty key");
    if (!out.emplace(key, value).second) throw DataError(where + ": key '" + key + "' given twice");
  }
  return out;
}

KeyValues load_key_values(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str(), path);
}

void apply_settings(RunSettings& settings, const KeyValues& values) {
  const auto& table = settings_table();
  for (const auto& [key, value] : values) {
    auto it = std::find_if(table.begin(), table.end(), [&](const Setting& s) { return s.key == key; });
    if (it == table.end()) throw DataError("unknown setting '" + key + "'");
    it->set(settings, value);
  }
}

const std::vector<std::string>& setting_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& s : settings_table()) k.push_back(s.key);
    return k;
  }();
  return keys;
}

std::string render_settings(const RunSettings& settings) {
  std::string out;
  for (const auto& s : settings_table()) out += s.key + "=" + s.get(settings) + "\n";
  return out;
}

}  // namespace dualbli

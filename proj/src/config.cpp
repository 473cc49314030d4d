#include "ahcr/config.hpp"

#include <charconv>
#include <fstream>

#include "ahcr/errors.hpp"

namespace ahcr {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const auto* begin = value.data();
  const auto* end = begin + value.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw InputError("config key '" + key + "': cannot parse number '" +
                     value + "'");
  return v;
}

long parse_long(const std::string& key, const std::string& value) {
  long v = 0;
  const auto* begin = value.data();
  const auto* end = begin + value.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw InputError("config key '" + key + "': cannot parse integer '" +
                     value + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on")
    return true;
  if (value == "false" || value == "0" || value == "no" || value == "off")
    return false;
  throw InputError("config key '" + key + "': cannot parse boolean '" + value +
                   "'");
}

std::array<int, 3> parse_widths(const std::string& value) {
  std::array<int, 3> widths{};
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const auto comma = value.find(',', pos);
    const std::string part =
        trim(comma == std::string::npos ? value.substr(pos)
                                        : value.substr(pos, comma - pos));
    widths[static_cast<std::size_t>(i)] =
        static_cast<int>(parse_long("widths", part));
    if (widths[static_cast<std::size_t>(i)] < 1)
      throw InputError("config key 'widths': widths must be positive");
    if (i < 2) {
      if (comma == std::string::npos)
        throw InputError("config key 'widths': expected three comma-separated values");
      pos = comma + 1;
    } else if (comma != std::string::npos) {
      throw InputError("config key 'widths': expected exactly three values");
    }
  }
  return widths;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "learning_rate")
    learning_rate = parse_double(key, value);
  else if (key == "momentum")
    momentum = parse_double(key, value);
  else if (key == "weight_decay")
    weight_decay = parse_double(key, value);
  else if (key == "batch_size")
    batch_size = static_cast<int>(parse_long(key, value));
  else if (key == "max_epochs" || key == "epochs")
    max_epochs = static_cast<int>(parse_long(key, value));
  else if (key == "seed")
    seed = static_cast<std::uint64_t>(parse_long(key, value));
  else if (key == "widths")
    widths = parse_widths(value);
  else if (key == "dropout_rate")
    dropout_rate = parse_double(key, value);
  else if (key == "precision") {
    if (value == "float32" || value == "float")
      precision = "float32";
    else if (value == "float64" || value == "double")
      precision = "float64";
    else
      throw InputError("config key 'precision': expected float32 or float64, got '" +
                       value + "'");
  } else if (key == "svm_lambda")
    svm_lambda = parse_double(key, value);
  else if (key == "svm_learning_rate")
    svm_learning_rate = parse_double(key, value);
  else if (key == "svm_epochs")
    svm_epochs = static_cast<int>(parse_long(key, value));
  else if (key == "svm_batch_size")
    svm_batch_size = static_cast<int>(parse_long(key, value));
  else if (key == "svm_dropout_rate")
    svm_dropout_rate = parse_double(key, value);
  else if (key == "train_images")
    train_images = value;
  else if (key == "train_labels")
    train_labels = value;
  else if (key == "test_images")
    test_images = value;
  else if (key == "test_labels")
    test_labels = value;
  else if (key == "invert")
    invert = parse_bool(key, value);
  else if (key == "synth")
    synth = parse_bool(key, value);
  else if (key == "synth_per_class" || key == "per_class")
    synth_per_class = static_cast<int>(parse_long(key, value));
  else if (key == "out_dir")
    out_dir = value;
  else if (key == "threads")
    threads = static_cast<int>(parse_long(key, value));
  else
    throw InputError("unknown config key '" + key + "'");
}

void RunConfig::apply_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos)
      throw InputError(path + ":" + std::to_string(line_no) +
                       ": expected 'key = value'");
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    if (key.empty())
      throw InputError(path + ":" + std::to_string(line_no) + ": empty key");
    set(key, value);
  }
}

std::string RunConfig::widths_string() const {
  return std::to_string(widths[0]) + "," + std::to_string(widths[1]) + "," +
         std::to_string(widths[2]);
}

void apply_preset(RunConfig& cfg, const std::string& name) {
  if (name == "desk") {
    cfg.widths = {16, 32, 64};
    cfg.max_epochs = 15;
  } else if (name == "full") {
    cfg.widths = {128, 256, 512};
    cfg.max_epochs = 400;
  } else {
    throw InputError("unknown preset '" + name + "' (expected desk or full)");
  }
}

}  // namespace ahcr

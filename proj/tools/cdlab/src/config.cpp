#include "cdlab/tools/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cdlab/error.hpp"

namespace cdlab::tools {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxRank = 20;

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

// Line of the first `"key"` used as an object key; 0 when absent.
std::size_t line_of_key(const std::string& text, const std::string& key) {
  const std::string quoted = "\"" + key + "\"";
  for (std::size_t pos = text.find(quoted); pos != std::string::npos; pos = text.find(quoted, pos + 1)) {
    std::size_t after = pos + quoted.size();
    while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
    if (after < text.size() && text[after] == ':') return line_of_offset(text, pos);
  }
  return 0;
}

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& path, const std::string& key, const std::string& message) const {
    throw ConfigError(path, line_of_key(text_, key), message);
  }

  void only_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) const {
    if (!obj.is_object()) fail(path, last(path), "expected an object");
    for (const auto& [key, value] : obj.items()) {
      if (allowed.count(key) == 0) fail(join(path, key), key, "unknown key");
    }
  }

  double number(const json& obj, const std::string& path, const std::string& key, double fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(join(path, key), key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(join(path, key), key, "expected a finite number");
    return d;
  }

  std::size_t count(const json& obj, const std::string& path, const std::string& key, std::size_t fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(join(path, key), key, "expected a nonnegative integer");
    return v.get<std::size_t>();
  }

  bool flag(const json& obj, const std::string& path, const std::string& key, bool fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) fail(join(path, key), key, "expected true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const json& obj, const std::string& path, const std::string& key,
                              std::vector<double> fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_array() || v.empty()) fail(join(path, key), key, "expected a nonempty array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) fail(join(path, key), key, "expected a nonempty array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::size_t> counts(const json& obj, const std::string& path, const std::string& key,
                                  std::vector<std::size_t> fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_array() || v.empty()) fail(join(path, key), key, "expected a nonempty array of integers");
    std::vector<std::size_t> out;
    for (const json& e : v) {
      if (!e.is_number_integer() || e.get<long long>() < 0) {
        fail(join(path, key), key, "expected a nonempty array of nonnegative integers");
      }
      out.push_back(e.get<std::size_t>());
    }
    return out;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  static std::string last(const std::string& path) {
    const auto dot = path.rfind('.');
    return dot == std::string::npos ? path : path.substr(dot + 1);
  }

  const std::string& text_;
};

void read_model(const Reader& rd, const json& obj, ExperimentConfig& cfg) {
  rd.only_keys(obj, "model", {"lambda0", "valency", "n", "trunc", "mu"});
  const double lambda0 = rd.number(obj, "model", "lambda0", 1.0);
  const double valency = rd.number(obj, "model", "valency", 2.0);
  const std::size_t n = rd.count(obj, "model", "n", 2);
  const std::size_t trunc = rd.count(obj, "model", "trunc", 512);
  if (n == 0 || n > kMaxRank) rd.fail("model.n", "n", "rank must be between 1 and 20");
  if (!(lambda0 > 0.0)) rd.fail("model.lambda0", "lambda0", "must be positive");
  if (valency < 0.0) rd.fail("model.valency", "valency", "must be nonnegative");
  cfg.model = ModelSpec::make(lambda0, valency, n, trunc);
  if (!obj.contains("mu")) return;
  const json& mu = obj.at("mu");
  if (!mu.is_array()) rd.fail("model.mu", "mu", "expected an array of [i, j, re, im] entries");
  for (std::size_t e = 0; e < mu.size(); ++e) {
    const std::string path = "model.mu[" + std::to_string(e) + "]";
    const json& item = mu.at(e);
    const bool shaped = item.is_array() && (item.size() == 3 || item.size() == 4) && item.at(0).is_number_integer() &&
                        item.at(1).is_number_integer() &&
                        std::all_of(item.begin() + 2, item.end(), [](const json& v) { return v.is_number(); });
    if (!shaped) rd.fail(path, "mu", "expected [i, j, re] or [i, j, re, im]");
    const long long i = item.at(0).get<long long>();
    const long long j = item.at(1).get<long long>();
    if (i < 0 || j < 0 || static_cast<std::size_t>(j) >= n || i >= j) {
      rd.fail(path, "mu", "indices must satisfy 0 <= i < j < n");
    }
    const double re = item.at(2).get<double>();
    const double im = item.size() == 4 ? item.at(3).get<double>() : 0.0;
    cfg.model.mu(i, j) = cplx(re, im);
  }
}

void validate_model(const ExperimentConfig& cfg) {
  try {
    cfg.model.validate();
  } catch (const Error& e) {
    throw ConfigError("model", line_of_key(cfg.text, "model"), e.what());
  }
}

}  // namespace

ConfigError::ConfigError(std::string field, std::size_t line, const std::string& message)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + field + ": " + message),
      field_(std::move(field)),
      line_(line) {}

ExperimentConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0), e.what());
  }
  ExperimentConfig cfg;
  cfg.text = text;
  const Reader rd(cfg.text);
  rd.only_keys(doc, "", {"model", "seed", "tolerance", "geometry", "sylvester", "commutant", "powerbound"});
  if (!doc.contains("model")) throw ConfigError("model", 0, "missing required section");
  read_model(rd, doc.at("model"), cfg);
  cfg.seed = rd.count(doc, "", "seed", 1);
  cfg.tolerance = rd.number(doc, "", "tolerance", 1e-9);
  if (!(cfg.tolerance > 0.0)) rd.fail("tolerance", "tolerance", "must be positive");

  if (doc.contains("geometry")) {
    const json& g = doc.at("geometry");
    rd.only_keys(g, "geometry", {"radii", "angles", "step", "general"});
    cfg.geometry.radii = rd.numbers(g, "geometry", "radii", cfg.geometry.radii);
    cfg.geometry.angles = rd.count(g, "geometry", "angles", cfg.geometry.angles);
    cfg.geometry.step = rd.number(g, "geometry", "step", cfg.geometry.step);
    cfg.geometry.general = rd.flag(g, "geometry", "general", cfg.geometry.general);
    if (cfg.geometry.angles == 0) rd.fail("geometry.angles", "angles", "must be positive");
    if (!(cfg.geometry.step > 0.0)) rd.fail("geometry.step", "step", "must be positive");
    for (double r : cfg.geometry.radii) {
      if (r < 0.0 || r + 2.0 * cfg.geometry.step >= 1.0) rd.fail("geometry.radii", "radii", "radii must lie in [0, 1 - 2 step)");
    }
  }
  if (doc.contains("sylvester")) {
    const json& s = doc.at("sylvester");
    rd.only_keys(s, "sylvester", {"lambda0", "valency", "shifts", "trunc", "fit_trunc"});
    cfg.sylvester.lambda0 = rd.numbers(s, "sylvester", "lambda0", cfg.sylvester.lambda0);
    cfg.sylvester.valency = rd.numbers(s, "sylvester", "valency", cfg.sylvester.valency);
    cfg.sylvester.shifts = rd.counts(s, "sylvester", "shifts", cfg.sylvester.shifts);
    cfg.sylvester.trunc = rd.count(s, "sylvester", "trunc", cfg.sylvester.trunc);
    cfg.sylvester.fit_trunc = rd.count(s, "sylvester", "fit_trunc", cfg.sylvester.fit_trunc);
    for (double l : cfg.sylvester.lambda0) {
      if (!(l > 0.0)) rd.fail("sylvester.lambda0", "lambda0", "weights must be positive");
    }
    for (double v : cfg.sylvester.valency) {
      if (!(v > 0.0)) rd.fail("sylvester.valency", "valency", "valencies must be positive");
    }
    const std::size_t widest = *std::max_element(cfg.sylvester.shifts.begin(), cfg.sylvester.shifts.end());
    if (cfg.sylvester.trunc < widest + 2 || cfg.sylvester.fit_trunc < widest + 2) {
      rd.fail("sylvester.trunc", "trunc", "truncation too small for the largest shift");
    }
  }
  if (doc.contains("commutant")) {
    const json& c = doc.at("commutant");
    rd.only_keys(c, "commutant", {"max_degree"});
    cfg.commutant.max_degree = rd.count(c, "commutant", "max_degree", cfg.commutant.max_degree);
    if (cfg.commutant.max_degree > 32) rd.fail("commutant.max_degree", "max_degree", "degree must be at most 32");
  }
  if (doc.contains("powerbound")) {
    const json& p = doc.at("powerbound");
    rd.only_keys(p, "powerbound", {"n_max", "trunc", "reduce"});
    cfg.powerbound.n_max = rd.count(p, "powerbound", "n_max", cfg.powerbound.n_max);
    cfg.powerbound.trunc = rd.count(p, "powerbound", "trunc", cfg.powerbound.trunc);
    cfg.powerbound.reduce = rd.flag(p, "powerbound", "reduce", cfg.powerbound.reduce);
    if (cfg.powerbound.n_max == 0) rd.fail("powerbound.n_max", "n_max", "must be positive");
    if (cfg.powerbound.trunc < 2) rd.fail("powerbound.trunc", "trunc", "must be at least 2");
  }
  validate_model(cfg);
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<file>", 0, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

void apply_overrides(ExperimentConfig& config, const Overrides& overrides) {
  if (overrides.trunc) {
    config.model.trunc = *overrides.trunc;
    config.sylvester.trunc = *overrides.trunc;
    config.powerbound.trunc = *overrides.trunc;
  }
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.tol) {
    if (!(*overrides.tol > 0.0)) throw ConfigError("--tol", 0, "must be positive");
    config.tolerance = *overrides.tol;
  }
  try {
    config.model.validate();
  } catch (const Error& e) {
    throw ConfigError("--trunc", 0, e.what());
  }
}

}  // namespace cdlab::tools

#include "projlab/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace projlab {

namespace {

using nlohmann::json;

class Parser {
 public:
  Parser(std::string_view text, int line) : s_(text), line_(line) {}

  json value() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    if (pos_ >= s_.size() || s_[pos_] == '\n' || s_[pos_] == '\r' || s_[pos_] == '#') {
      fail("missing value");
    }
    const char c = s_[pos_];
    if (c == '"') return basic_string();
    if (c == '\'') return literal_string();
    if (c == '[') return array();
    return bare();
  }

  void skip_ws() {
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        if (c == '\n') ++line_;
        ++pos_;
      } else if (c == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  bool at_end() {
    skip_ws();
    return pos_ >= s_.size();
  }

  std::size_t pos() const { return pos_; }
  int line() const { return line_; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("line " + std::to_string(line_) + ": " + msg);
  }

 private:
  json basic_string() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\n') fail("unterminated string");
      if (c == '\\') {
        if (pos_ >= s_.size()) fail("unterminated escape");
        const char e = s_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      }
      out += c;
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  json literal_string() {
    ++pos_;
    const std::size_t end = s_.find('\'', pos_);
    if (end == std::string_view::npos) fail("unterminated string");
    std::string out(s_.substr(pos_, end - pos_));
    if (out.find('\n') != std::string::npos) fail("unterminated string");
    pos_ = end + 1;
    return out;
  }

  json array() {
    const int open_line = line_;
    ++pos_;
    json arr = json::array();
    while (true) {
      skip_ws();
      if (pos_ >= s_.size()) {
        line_ = open_line;
        fail("unterminated array");
      }
      if (s_[pos_] == ']') {
        ++pos_;
        return arr;
      }
      json v = value();
      if (v.is_array()) fail("nested arrays are not supported");
      arr.push_back(std::move(v));
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == ',') {
        ++pos_;
      } else {
        skip_ws();
        if (pos_ >= s_.size()) {
          line_ = open_line;
          fail("unterminated array");
        }
        if (s_[pos_] != ']') fail("expected ',' or ']' in array");
      }
    }
  }

  json bare() {
    const std::size_t start = pos_;
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == ',' || c == ']' || c == '#' || std::isspace(static_cast<unsigned char>(c))) break;
      ++pos_;
    }
    std::string tok(s_.substr(start, pos_ - start));
    if (tok == "true") return true;
    if (tok == "false") return false;
    std::string clean;
    for (char c : tok) {
      if (c != '_') clean += c;
    }
    if (clean == "inf" || clean == "+inf") return std::numeric_limits<double>::infinity();
    if (clean == "-inf") return -std::numeric_limits<double>::infinity();
    if (clean == "nan" || clean == "+nan" || clean == "-nan") {
      return std::numeric_limits<double>::quiet_NaN();
    }
    if (clean.empty()) fail("missing value");
    const bool is_float = clean.find_first_of(".eE") != std::string::npos;
    try {
      std::size_t used = 0;
      if (is_float) {
        const double v = std::stod(clean, &used);
        if (used == clean.size()) return v;
      } else {
        const long long v = std::stoll(clean, &used, 10);
        if (used == clean.size()) return static_cast<std::int64_t>(v);
      }
    } catch (const std::exception&) {
    }
    fail("invalid value '" + tok + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;
};

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) {
      return false;
    }
  }
  return true;
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

// Typed accessors. Errors name the key.
class Reader {
 public:
  Reader(const ConfigDoc& doc, std::string section) : doc_(doc), section_(std::move(section)) {}

  const json* find(const std::string& key) const { return doc_.find(section_, key); }

  const json& require(const std::string& key) const {
    const json* v = find(key);
    if (!v) throw ConfigError(key + ": missing required key");
    return *v;
  }

  void get(const std::string& key, std::string& out) const {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(key + ": expected a string");
      out = v->get<std::string>();
    }
  }
  void get(const std::string& key, double& out) const {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(key + ": expected a number");
      out = v->get<double>();
    }
  }
  void get(const std::string& key, bool& out) const {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(key + ": expected true or false");
      out = v->get<bool>();
    }
  }
  template <typename Int>
  void get_int(const std::string& key, Int& out) const {
    if (const json* v = find(key)) out = as_int<Int>(key, *v);
  }
  void get(const std::string& key, std::vector<int>& out) const {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(key + ": expected an array of integers");
      out.clear();
      for (const auto& e : *v) out.push_back(as_int<int>(key, e));
    }
  }
  void get(const std::string& key, std::vector<double>& out) const {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(key + ": expected an array of numbers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number()) throw ConfigError(key + ": expected an array of numbers");
        out.push_back(e.get<double>());
      }
    }
  }
  void get(const std::string& key, std::vector<std::string>& out) const {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(key + ": expected an array of strings");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_string()) throw ConfigError(key + ": expected an array of strings");
        out.push_back(e.get<std::string>());
      }
    }
  }
  void get_seed(std::uint64_t& out) const {
    if (const json* v = find("seed")) {
      if (v->is_number_unsigned()) {
        out = v->get<std::uint64_t>();
      } else if (v->is_number_integer() && v->get<std::int64_t>() >= 0) {
        out = static_cast<std::uint64_t>(v->get<std::int64_t>());
      } else {
        throw ConfigError("seed: expected a nonnegative integer");
      }
    }
  }

 private:
  template <typename Int>
  static Int as_int(const std::string& key, const json& v) {
    if (!v.is_number_integer()) throw ConfigError(key + ": expected an integer");
    const auto x = v.get<std::int64_t>();
    if (x < static_cast<std::int64_t>(std::numeric_limits<Int>::min()) ||
        static_cast<std::uint64_t>(x) > static_cast<std::uint64_t>(std::numeric_limits<Int>::max())) {
      if (x >= 0 || std::numeric_limits<Int>::is_signed) {
        throw ConfigError(key + ": integer out of range");
      }
    }
    return static_cast<Int>(x);
  }

  const ConfigDoc& doc_;
  std::string section_;
};

Method parse_method(const std::string& name) {
  for (Method m : {Method::kSlicing, Method::kKernel, Method::kGaussIs}) {
    if (method_name(m) == name) return m;
  }
  throw ConfigError("estimator.method: unknown estimator '" + name + "'");
}

}  // namespace

ConfigDoc ConfigDoc::parse(std::string_view text) {
  ConfigDoc doc;
  std::string section;
  std::size_t pos = 0;
  int line = 1;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string raw(text.substr(pos, eol - pos));
    std::string stripped = trim(raw);
    if (stripped.empty() || stripped[0] == '#') {
      pos = eol + 1;
      ++line;
      continue;
    }
    if (stripped[0] == '[') {
      const std::size_t close = stripped.find(']');
      if (close == std::string::npos) {
        throw ConfigError("line " + std::to_string(line) + ": unterminated section header");
      }
      const std::string rest = trim(stripped.substr(close + 1));
      if (!rest.empty() && rest[0] != '#') {
        throw ConfigError("line " + std::to_string(line) + ": trailing characters after section");
      }
      section = trim(stripped.substr(1, close - 1));
      if (!valid_key(section) || section.find('.') != std::string::npos) {
        throw ConfigError("line " + std::to_string(line) + ": invalid section name '" + section + "'");
      }
      if (doc.root_.contains(section) && !doc.root_[section].is_object()) {
        throw ConfigError("line " + std::to_string(line) + ": section '" + section +
                          "' clashes with a key");
      }
      if (!doc.root_.contains(section)) doc.root_[section] = nlohmann::json::object();
      pos = eol + 1;
      ++line;
      continue;
    }
    const std::size_t eq = raw.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(raw).substr(0, eq));
    if (!valid_key(key)) {
      throw ConfigError("line " + std::to_string(line) + ": invalid key '" + key + "'");
    }
    // The value may span lines (arrays); parse from after '=' to the end.
    const std::size_t vstart = pos + eq + 1;
    Parser p(text.substr(vstart), line);
    nlohmann::json value = p.value();
    // Rest of the value's final line must be blank or a comment.
    std::size_t after = vstart + p.pos();
    std::size_t vend = text.find('\n', after);
    if (vend == std::string_view::npos) vend = text.size();
    const std::string tail = trim(text.substr(after, vend - after));
    if (!tail.empty() && tail[0] != '#') {
      throw ConfigError("line " + std::to_string(p.line()) + ": trailing characters after value");
    }
    nlohmann::json& table = section.empty() ? doc.root_ : doc.root_[section];
    if (table.contains(key)) {
      throw ConfigError("line " + std::to_string(line) + ": duplicate key '" + key + "'");
    }
    table[key] = std::move(value);
    line = p.line() + 1;
    pos = vend + 1;
  }
  return doc;
}

ConfigDoc ConfigDoc::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (j.is_object() && j.contains("config")) return from_json(j["config"]);
    return from_json(j);
  }
  return parse(text);
}

ConfigDoc ConfigDoc::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  ConfigDoc doc;
  doc.root_ = j;
  return doc;
}

const nlohmann::json* ConfigDoc::find(const std::string& section, const std::string& key) const {
  if (!section.empty()) {
    const auto s = root_.find(section);
    if (s != root_.end() && s->is_object()) {
      const auto v = s->find(key);
      if (v != s->end()) return &*v;
    }
  }
  const auto v = root_.find(key);
  if (v != root_.end() && !v->is_object()) return &*v;
  return nullptr;
}

void ConfigDoc::set(const std::string& section, const std::string& key, nlohmann::json value) {
  if (section.empty()) {
    root_[key] = std::move(value);
  } else {
    if (!root_.contains(section) || !root_[section].is_object()) root_[section] = nlohmann::json::object();
    root_[section][key] = std::move(value);
  }
}

ExperimentConfig experiment_config(const ConfigDoc& doc, const std::string& section) {
  const Reader r(doc, section);
  ExperimentConfig cfg;
  if (!r.require("family").is_string()) throw ConfigError("family: expected a string");
  r.require("d_list");
  r.get("family", cfg.family);
  r.get_int("df", cfg.df);
  r.get("shell_low", cfg.shell_low);
  r.get("d_list", cfg.d_list);
  r.get_int("n_betas", cfg.n_betas);
  r.get_int("n_samples", cfg.n_samples);
  r.get_int("mc_reps", cfg.mc_reps);
  r.get("eps_list", cfg.eps_list);
  r.get("x_range", cfg.x_range);
  std::string method(method_name(cfg.estimator.method));
  r.get("estimator.method", method);
  cfg.estimator.method = parse_method(method);
  r.get_int("estimator.n_slices", cfg.estimator.n_slices);
  r.get("estimator.bandwidth", cfg.estimator.bandwidth);
  r.get_int("estimator.n_grid", cfg.estimator.n_grid);
  r.get_int("estimator.is_reps", cfg.estimator.is_reps);
  r.get_seed(cfg.seed);
  r.get_int("workers", cfg.workers);
  r.get("functionals", cfg.functionals);
  r.get_int("k", cfg.k);
  r.get_int("l", cfg.l);
  r.get("j_indices", cfg.j_indices);
  r.get("h", cfg.h);
  r.get("x_list", cfg.x_list);
  r.get("enforce_precondition", cfg.enforce_precondition);
  r.get("max_degenerate_fraction", cfg.max_degenerate_fraction);
  if (section == "proof") {
    cfg.validate_proof();
  } else {
    cfg.validate();
  }
  return cfg;
}

MomentsConfig moments_config(const ConfigDoc& doc, const std::string& section) {
  const Reader r(doc, section);
  MomentsConfig cfg;
  r.get("family", cfg.family);
  r.get_int("df", cfg.df);
  r.get("shell_low", cfg.shell_low);
  r.get("d_list", cfg.d_list);
  r.get_int("k", cfg.k);
  r.get_int("reps", cfg.reps);
  r.get("t1a", cfg.t1a);
  r.get_int("t1b_g", cfg.t1b_g);
  r.get("t1b", cfg.t1b);
  r.get("prop5_g", cfg.prop5_g);
  r.get("prop5_h", cfg.prop5_h);
  r.get_seed(cfg.seed);
  r.get_int("workers", cfg.workers);
  cfg.validate();
  return cfg;
}

AppsConfig apps_config(const ConfigDoc& doc, const std::string& section) {
  const Reader r(doc, section);
  AppsConfig cfg;
  r.get("family", cfg.family);
  r.get_int("df", cfg.df);
  r.get("shell_low", cfg.shell_low);
  r.get_int("d", cfg.d);
  r.get_int("n", cfg.n);
  r.get_int("n_square", cfg.n_square);
  r.get("links", cfg.links);
  r.get("methods", cfg.methods);
  r.get_int("n_slices", cfg.n_slices);
  r.get("noise_sd", cfg.noise_sd);
  r.get_int("repeats", cfg.repeats);
  r.get_int("sparse_d", cfg.sparse_d);
  r.get_int("sparse_n", cfg.sparse_n);
  r.get_int("sparse_cases", cfg.sparse_cases);
  r.get("sparse_noise", cfg.sparse_noise);
  r.get_int("sparse_slices", cfg.sparse_slices);
  r.get("x_range", cfg.x_range);
  r.get_seed(cfg.seed);
  r.get_int("workers", cfg.workers);
  cfg.validate();
  return cfg;
}

nlohmann::json config_echo(const ExperimentConfig& c, const std::string& section) {
  json s = {{"family", c.family},
            {"df", c.df},
            {"shell_low", c.shell_low},
            {"d_list", c.d_list},
            {"n_betas", c.n_betas},
            {"n_samples", c.n_samples},
            {"mc_reps", c.mc_reps},
            {"eps_list", c.eps_list},
            {"x_range", c.x_range},
            {"estimator.method", std::string(method_name(c.estimator.method))},
            {"estimator.n_slices", c.estimator.n_slices},
            {"estimator.bandwidth", c.estimator.bandwidth},
            {"estimator.n_grid", c.estimator.n_grid},
            {"estimator.is_reps", c.estimator.is_reps},
            {"seed", c.seed},
            {"workers", c.workers},
            {"max_degenerate_fraction", c.max_degenerate_fraction}};
  if (section == "proof") {
    s["functionals"] = c.functionals;
    s["k"] = c.k;
    s["l"] = c.l;
    s["j_indices"] = c.j_indices;
    s["h"] = c.h;
    s["x_list"] = c.x_list;
    s["enforce_precondition"] = c.enforce_precondition;
  }
  return json{{section, s}};
}

nlohmann::json config_echo(const MomentsConfig& c, const std::string& section) {
  return json{{section,
               {{"family", c.family},
                {"df", c.df},
                {"shell_low", c.shell_low},
                {"d_list", c.d_list},
                {"k", c.k},
                {"reps", c.reps},
                {"t1a", c.t1a},
                {"t1b_g", c.t1b_g},
                {"t1b", c.t1b},
                {"prop5_g", c.prop5_g},
                {"prop5_h", c.prop5_h},
                {"seed", c.seed},
                {"workers", c.workers}}}};
}

nlohmann::json config_echo(const AppsConfig& c, const std::string& section) {
  return json{{section,
               {{"family", c.family},
                {"df", c.df},
                {"shell_low", c.shell_low},
                {"d", c.d},
                {"n", c.n},
                {"n_square", c.n_square},
                {"links", c.links},
                {"methods", c.methods},
                {"n_slices", c.n_slices},
                {"noise_sd", c.noise_sd},
                {"repeats", c.repeats},
                {"sparse_d", c.sparse_d},
                {"sparse_n", c.sparse_n},
                {"sparse_cases", c.sparse_cases},
                {"sparse_noise", c.sparse_noise},
                {"sparse_slices", c.sparse_slices},
                {"x_range", c.x_range},
                {"seed", c.seed},
                {"workers", c.workers}}}};
}

}  // namespace projlab

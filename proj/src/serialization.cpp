#include "dynregret/serialization.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dynregret/errors.hpp"

namespace dynregret {

std::string hex_float(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double parse_real(const Json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() && *end == '\0') return v;
  }
  throw Error(ErrorCode::kParseError, std::string(what) + ": expected a real number, got " + j.dump());
}

Vector parse_vector(const Json& j, const char* what) {
  if (!j.is_array()) {
    throw Error(ErrorCode::kParseError, std::string(what) + ": expected an array");
  }
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_real(j[i], what);
  return v;
}

Json vector_to_hex(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(hex_float(v(i)));
  return out;
}

Json feasible_set_to_json(const FeasibleSet& set) {
  if (const auto* b = set.as_ball()) {
    return {{"kind", "ball"}, {"center", vector_to_hex(b->center)}, {"radius", hex_float(b->radius)}};
  }
  if (const auto* b = set.as_box()) {
    return {{"kind", "box"}, {"lower", vector_to_hex(b->lower)}, {"upper", vector_to_hex(b->upper)}};
  }
  return {{"kind", "unconstrained"}};
}

FeasibleSet feasible_set_from_json(const Json& j) {
  if (j.is_null()) return FeasibleSet::unconstrained();
  if (j.is_string() && j.get<std::string>() == "unconstrained") return FeasibleSet::unconstrained();
  if (!j.is_object() || !j.contains("kind")) {
    throw Error(ErrorCode::kParseError, "feasible_set must be an object with a 'kind'");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "unconstrained") return FeasibleSet::unconstrained();
  if (kind == "ball") {
    return FeasibleSet::ball(parse_vector(j.at("center"), "ball center"),
                             parse_real(j.at("radius"), "ball radius"));
  }
  if (kind == "box") {
    return FeasibleSet::box(parse_vector(j.at("lower"), "box lower"),
                            parse_vector(j.at("upper"), "box upper"));
  }
  throw Error(ErrorCode::kParseError, "unknown feasible set kind '" + kind + "'");
}

Json sequence_to_json(const FunctionSequence& seq) {
  const auto n = seq.dimension();
  Json losses = Json::array();
  for (const auto& f : seq.losses()) {
    Json q = Json::array();
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) q.push_back(hex_float(f.curvature()(r, c)));
    }
    losses.push_back({{"Q", std::move(q)}, {"c", vector_to_hex(f.center())}, {"offset", hex_float(f.offset())}});
  }
  return {
      {"format", "dynregret.sequence/1"},
      {"kind", to_string(seq.kind())},
      {"dim", n},
      {"T", seq.horizon()},
      {"mu", hex_float(seq.mu())},
      {"L", hex_float(seq.smoothness())},
      {"L_H", hex_float(seq.hessian_lipschitz())},
      {"regularity_only", seq.regularity_comparison_only()},
      {"feasible_set", feasible_set_to_json(seq.feasible_set())},
      {"losses", std::move(losses)},
  };
}

FunctionSequence sequence_from_json(const Json& j) {
  try {
    const auto n = j.at("dim").get<Eigen::Index>();
    const auto horizon = j.at("T").get<size_t>();
    const Json& losses_json = j.at("losses");
    if (n < 1 || !losses_json.is_array() || losses_json.size() != horizon) {
      throw Error(ErrorCode::kParseError, "sequence needs dim >= 1 and exactly T losses");
    }
    std::vector<QuadraticLoss> losses;
    losses.reserve(horizon);
    for (const auto& lj : losses_json) {
      const Vector flat = parse_vector(lj.at("Q"), "Q");
      if (flat.size() != n * n) throw Error(ErrorCode::kParseError, "Q must have dim*dim entries");
      Matrix q(n, n);
      for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) q(r, c) = flat(r * n + c);
      }
      const double offset = lj.contains("offset") ? parse_real(lj.at("offset"), "offset") : 0.0;
      losses.emplace_back(std::move(q), parse_vector(lj.at("c"), "c"), offset);
    }
    std::optional<FunctionSequence::Constants> declared;
    if (j.contains("mu") && j.contains("L")) {
      declared = FunctionSequence::Constants{parse_real(j.at("mu"), "mu"), parse_real(j.at("L"), "L"), 0.0};
    }
    FunctionSequence seq(std::move(losses), feasible_set_from_json(j.value("feasible_set", Json())), declared);
    if (j.contains("kind")) seq.set_kind(environment_kind_from_string(j.at("kind").get<std::string>()));
    if (j.value("regularity_only", false)) seq.mark_regularity_comparison_only();
    return seq;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("sequence JSON: ") + e.what());
  }
}

void save_sequence_json(const FunctionSequence& seq, const std::filesystem::path& path) {
  write_text_file(path, sequence_to_json(seq).dump(1) + "\n");
}

FunctionSequence load_sequence_json(const std::filesystem::path& path) {
  try {
    return sequence_from_json(Json::parse(read_text_file(path)));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "write to '" + path.string() + "' failed");
}

namespace {

class TomlReader {
 public:
  explicit TomlReader(const std::string& text) : s_(text) {}

  Json parse() {
    Json root = Json::object();
    Json* table = &root;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        table = parse_header(root);
      } else {
        auto path = parse_key();
        skip_ws();
        expect('=');
        skip_ws();
        Json value = parse_value();
        assign(*table, path, std::move(value));
      }
      end_of_line();
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    size_t line = 1;
    for (size_t i = 0; i < pos_ && i < s_.size(); ++i) line += s_[i] == '\n';
    throw Error(ErrorCode::kParseError, "TOML line " + std::to_string(line) + ": " + msg);
  }

  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }
  char get() { return eof() ? '\0' : s_[pos_++]; }

  void expect(char c) {
    if (get() != c) fail(std::string("expected '") + c + "'");
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
  }

  void skip_blank_lines() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\r' || peek() == '\n') { ++pos_; continue; }
      break;
    }
  }

  // whitespace, comments and newlines inside arrays / inline tables
  void skip_space_any() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\r' || peek() == '\n') { ++pos_; continue; }
      break;
    }
  }

  void end_of_line() {
    skip_ws();
    skip_comment();
    if (eof()) return;
    if (peek() == '\r') ++pos_;
    if (get() != '\n') fail("unexpected trailing characters");
  }

  std::string parse_simple_key() {
    if (peek() == '"') return parse_basic_string();
    if (peek() == '\'') return parse_literal_string();
    std::string key;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) {
      key += get();
    }
    if (key.empty()) fail("expected a key");
    return key;
  }

  std::vector<std::string> parse_key() {
    std::vector<std::string> path{parse_simple_key()};
    skip_ws();
    while (peek() == '.') {
      ++pos_;
      skip_ws();
      path.push_back(parse_simple_key());
      skip_ws();
    }
    return path;
  }

  Json* descend(Json& base, const std::string& key) {
    Json* node = &base[key];
    if (node->is_null()) *node = Json::object();
    if (node->is_array() && !node->empty() && node->back().is_object()) node = &node->back();
    if (!node->is_object()) fail("key '" + key + "' is not a table");
    return node;
  }

  Json* parse_header(Json& root) {
    expect('[');
    const bool array_table = peek() == '[';
    if (array_table) ++pos_;
    skip_ws();
    auto path = parse_key();
    expect(']');
    if (array_table) expect(']');
    Json* node = &root;
    for (size_t i = 0; i + 1 < path.size(); ++i) node = descend(*node, path[i]);
    if (array_table) {
      Json& arr = (*node)[path.back()];
      if (arr.is_null()) arr = Json::array();
      if (!arr.is_array()) fail("'" + path.back() + "' is not an array of tables");
      arr.push_back(Json::object());
      return &arr.back();
    }
    return descend(*node, path.back());
  }

  void assign(Json& table, const std::vector<std::string>& path, Json value) {
    Json* node = &table;
    for (size_t i = 0; i + 1 < path.size(); ++i) node = descend(*node, path[i]);
    if (node->contains(path.back())) fail("duplicate key '" + path.back() + "'");
    (*node)[path.back()] = std::move(value);
  }

  std::string parse_basic_string() {
    expect('"');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = get();
      if (c == '"') break;
      if (c != '\\') { out += c; continue; }
      char e = get();
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: fail(std::string("unsupported escape \\") + e);
      }
    }
    return out;
  }

  std::string parse_literal_string() {
    expect('\'');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = get();
      if (c == '\'') break;
      out += c;
    }
    return out;
  }

  Json parse_number() {
    std::string tok;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                      peek() == '+' || peek() == '-' || peek() == '.')) {
      char c = get();
      if (c != '_') tok += c;
    }
    if (tok.empty()) fail("expected a value");
    const std::string body = (tok[0] == '+' || tok[0] == '-') ? tok.substr(1) : tok;
    if (body == "inf" || body == "nan") {
      const double v = body == "inf" ? INFINITY : NAN;
      return tok[0] == '-' ? -v : v;
    }
    const bool is_float = tok.find_first_of(".eE") != std::string::npos && tok.rfind("0x", 0) != 0;
    char* end = nullptr;
    if (!is_float) {
      const long long v = std::strtoll(tok.c_str(), &end, 0);
      if (*end == '\0') return v;
    }
    const double v = std::strtod(tok.c_str(), &end);
    if (*end != '\0') fail("malformed number '" + tok + "'");
    return v;
  }

  Json parse_value() {
    const char c = peek();
    if (c == '"') {
      if (s_.compare(pos_, 3, "\"\"\"") == 0) fail("multi-line strings are not supported");
      return parse_basic_string();
    }
    if (c == '\'') return parse_literal_string();
    if (c == '[') {
      ++pos_;
      Json arr = Json::array();
      while (true) {
        skip_space_any();
        if (peek() == ']') { ++pos_; break; }
        arr.push_back(parse_value());
        skip_space_any();
        if (peek() == ',') { ++pos_; continue; }
        if (peek() == ']') { ++pos_; break; }
        fail("expected ',' or ']' in array");
      }
      return arr;
    }
    if (c == '{') {
      ++pos_;
      Json obj = Json::object();
      skip_ws();
      if (peek() == '}') { ++pos_; return obj; }
      while (true) {
        skip_ws();
        auto path = parse_key();
        skip_ws();
        expect('=');
        skip_ws();
        assign(obj, path, parse_value());
        skip_ws();
        if (peek() == ',') { ++pos_; continue; }
        expect('}');
        break;
      }
      return obj;
    }
    if (s_.compare(pos_, 4, "true") == 0) { pos_ += 4; return true; }
    if (s_.compare(pos_, 5, "false") == 0) { pos_ += 5; return false; }
    return parse_number();
  }

  const std::string& s_;
  size_t pos_ = 0;
};

}  // namespace

Json parse_toml(const std::string& text) { return TomlReader(text).parse(); }

Json load_document(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  if (path.extension() == ".toml") return parse_toml(text);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

}  // namespace dynregret

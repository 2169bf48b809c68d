#include "fpi/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <sstream>
#include <string_view>

#include "fpi/error.hpp"

namespace fpi {

bool operator==(const OperatorSpec& a, const OperatorSpec& b) {
  return a.kind == b.kind && a.set == b.set && a.theta == b.theta && a.plane_i == b.plane_i &&
         a.plane_j == b.plane_j && a.matrix == b.matrix && a.shift == b.shift &&
         a.lambda == b.lambda && a.children == b.children;
}

const std::vector<std::string>& known_check_names() {
  static const std::vector<std::string> names{
      "coupling",        "domain_invariance", "exp_bound", "fejer",      "fejer_bounded",
      "key_inequality",  "limit",             "residual_to_zero",        "weak_limit",
  };
  return names;
}

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

// ---------------------------------------------------------------------------
// Lexical layer: sections of key = value entries.

struct Value {
  enum class Type { Number, Text, List };
  Type type = Type::Number;
  double number = 0.0;
  std::string text;
  std::vector<Value> items;
};

struct Entry {
  Value value;
  int line = 0;
  mutable bool used = false;
};

struct Section {
  int line = 0;
  std::map<std::string, Entry> entries;
};

[[noreturn]] void parse_error(int line, const std::string& msg) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + msg);
}

[[noreturn]] void invalid(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::ValidationError, path + ": " + msg);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && quoted) {
      ++i;
    } else if (line[i] == '"') {
      quoted = !quoted;
    } else if (line[i] == '#' && !quoted) {
      return line.substr(0, i);
    }
  }
  return line;
}

class ValueParser {
public:
  ValueParser(std::string_view text, int line) : s_(text), line_(line) {}

  Value parse_all() {
    Value v = parse_value();
    skip_ws();
    if (pos_ != s_.size()) parse_error(line_, "unexpected trailing text '" + std::string(s_.substr(pos_)) + "'");
    return v;
  }

private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  Value parse_value() {
    skip_ws();
    if (pos_ >= s_.size()) parse_error(line_, "missing value");
    if (s_[pos_] == '[') return parse_list();
    if (s_[pos_] == '"') return parse_quoted();
    return parse_bare();
  }

  Value parse_list() {
    Value v;
    v.type = Value::Type::List;
    ++pos_;
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == ']') {
      ++pos_;
      return v;
    }
    for (;;) {
      v.items.push_back(parse_value());
      skip_ws();
      if (pos_ >= s_.size()) parse_error(line_, "unterminated list");
      if (s_[pos_] == ',') {
        ++pos_;
        continue;
      }
      if (s_[pos_] == ']') {
        ++pos_;
        return v;
      }
      parse_error(line_, std::string("expected ',' or ']' but found '") + s_[pos_] + "'");
    }
  }

  Value parse_quoted() {
    Value v;
    v.type = Value::Type::Text;
    ++pos_;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\') {
        if (++pos_ >= s_.size()) break;
        if (s_[pos_] != '"' && s_[pos_] != '\\') parse_error(line_, "unknown escape in string");
      }
      v.text.push_back(s_[pos_++]);
    }
    if (pos_ >= s_.size()) parse_error(line_, "unterminated string");
    ++pos_;
    return v;
  }

  Value parse_bare() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (is_name_char(s_[pos_]) || s_[pos_] == '+' || s_[pos_] == '/')) ++pos_;
    if (pos_ == start) parse_error(line_, std::string("unexpected character '") + s_[pos_] + "'");
    const std::string_view token = s_.substr(start, pos_ - start);
    Value v;
    double number = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), number);
    if (res.ec == std::errc() && res.ptr == token.data() + token.size()) {
      v.number = number;
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(token[0])) || token[0] == '-' || token[0] == '+') {
      parse_error(line_, "malformed number '" + std::string(token) + "'");
    }
    v.type = Value::Type::Text;
    v.text = token;
    return v;
  }

  std::string_view s_;
  int line_;
  std::size_t pos_ = 0;
};

std::map<std::string, Section> lex(const std::string& text) {
  std::map<std::string, Section> sections;
  sections[""].line = 0;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') parse_error(line_no, "section header must end with ']'");
      const std::string_view name = trim(line.substr(1, line.size() - 2));
      if (name.empty() || !std::all_of(name.begin(), name.end(), is_name_char)) {
        parse_error(line_no, "bad section name '" + std::string(name) + "'");
      }
      current = name;
      auto [it, inserted] = sections.try_emplace(current);
      if (!inserted) parse_error(line_no, "duplicate section [" + current + "]");
      it->second.line = line_no;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) parse_error(line_no, "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty() || !std::all_of(key.begin(), key.end(), [](char c) {
          return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
        })) {
      parse_error(line_no, "bad key '" + std::string(key) + "'");
    }
    Entry entry{ValueParser(line.substr(eq + 1), line_no).parse_all(), line_no};
    auto& entries = sections[current].entries;
    if (!entries.try_emplace(std::string(key), std::move(entry)).second) {
      parse_error(line_no, "duplicate key '" + std::string(key) + "'");
    }
  }
  return sections;
}

// ---------------------------------------------------------------------------
// Typed access with field paths for validation messages.

class Fields {
public:
  Fields(const Section& section, std::string prefix) : s_(section), prefix_(std::move(prefix)) {}

  std::string path(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

  bool has(const std::string& key) const { return s_.entries.count(key) != 0; }

  const Value& raw(const std::string& key) const {
    auto it = s_.entries.find(key);
    if (it == s_.entries.end()) invalid(path(key), "required");
    it->second.used = true;
    return it->second.value;
  }

  double number(const std::string& key) const { return as_number(raw(key), path(key)); }

  double number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  std::size_t count(const std::string& key) const { return as_count(raw(key), path(key)); }

  std::string text(const std::string& key) const {
    const Value& v = raw(key);
    if (v.type != Value::Type::Text) invalid(path(key), "expected a name or string");
    return v.text;
  }

  std::vector<double> numbers(const std::string& key) const {
    return as_numbers(raw(key), path(key));
  }

  std::vector<std::vector<double>> rows(const std::string& key) const {
    const Value& v = raw(key);
    if (v.type != Value::Type::List) invalid(path(key), "expected a list of lists");
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < v.items.size(); ++i) {
      out.push_back(as_numbers(v.items[i], path(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  Vec vec(const std::string& key, std::size_t dim) const { return to_vec(numbers(key), dim, path(key)); }

  void reject_unused() const {
    for (const auto& [key, entry] : s_.entries) {
      if (!entry.used) invalid(path(key), "unknown key (line " + std::to_string(entry.line) + ")");
    }
  }

  static double as_number(const Value& v, const std::string& path) {
    if (v.type != Value::Type::Number) invalid(path, "expected a number");
    if (!std::isfinite(v.number)) invalid(path, "must be finite");
    return v.number;
  }

  static std::size_t as_count(const Value& v, const std::string& path) {
    const double d = as_number(v, path);
    if (d < 0 || d != std::floor(d) || d > 1e15) invalid(path, "expected a nonnegative integer");
    return static_cast<std::size_t>(d);
  }

  static std::vector<double> as_numbers(const Value& v, const std::string& path) {
    if (v.type != Value::Type::List) invalid(path, "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.items.size(); ++i) {
      out.push_back(as_number(v.items[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  static Vec to_vec(std::vector<double> c, std::size_t dim, const std::string& path) {
    if (c.size() != dim) {
      invalid(path, "expected " + std::to_string(dim) + " coordinates, got " + std::to_string(c.size()));
    }
    return Vec(std::move(c));
  }

private:
  const Section& s_;
  std::string prefix_;
};

// Runs a constructor, turning library errors into ValidationError at path.
template <class F>
auto at_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ValidationError || e.code() == ErrorCode::ParseError) throw;
    invalid(path, e.detail());
  }
}

ConvexSet parse_set(const Fields& f, std::size_t dim) {
  const std::string kind = f.text("kind");
  if (kind == "ball") {
    const Vec center = f.vec("center", dim);
    const double radius = f.number("radius");
    if (!(radius > 0.0)) invalid(f.path("radius"), "radius must be positive");
    return at_path(f.path("radius"), [&] { return ConvexSet::ball(center, radius); });
  }
  if (kind == "box") {
    const Vec lo = f.vec("lo", dim);
    const Vec hi = f.vec("hi", dim);
    return at_path(f.path("hi"), [&] { return ConvexSet::box(lo, hi); });
  }
  if (kind == "halfspace" || kind == "hyperplane") {
    const Vec normal = f.vec("normal", dim);
    const double offset = f.number("offset");
    return at_path(f.path("normal"), [&] {
      return kind == "halfspace" ? ConvexSet::halfspace(normal, offset)
                                 : ConvexSet::hyperplane(normal, offset);
    });
  }
  if (kind == "affine") {
    const Vec base = f.vec("basepoint", dim);
    std::vector<Vec> dirs;
    if (f.has("directions")) {
      const auto rows = f.rows("directions");
      for (std::size_t i = 0; i < rows.size(); ++i) {
        dirs.push_back(Fields::to_vec(rows[i], dim, f.path("directions") + "[" + std::to_string(i) + "]"));
      }
    }
    return at_path(f.path("directions"), [&] { return ConvexSet::affine(base, dirs); });
  }
  if (kind == "full") return ConvexSet::full(dim);
  invalid(f.path("kind"), "unknown set kind '" + kind + "'");
}

OperatorKind operator_kind_from(const std::string& name, const std::string& path) {
  for (auto k : {OperatorKind::Identity, OperatorKind::NegIdentity, OperatorKind::Projection,
                 OperatorKind::Reflection, OperatorKind::Rotation2D, OperatorKind::AffineMap,
                 OperatorKind::Average, OperatorKind::Compose}) {
    if (to_string(k) == name) return k;
  }
  invalid(path, "unknown operator kind '" + name + "'");
}

OperatorSpec parse_operator(const std::map<std::string, Section>& sections, const std::string& name,
                            std::vector<std::string>& visited) {
  auto it = sections.find(name);
  if (it == sections.end()) invalid(name, "missing section [" + name + "]");
  visited.push_back(name);
  Fields f(it->second, name);
  OperatorSpec spec;
  spec.kind = operator_kind_from(f.text("kind"), f.path("kind"));
  switch (spec.kind) {
    case OperatorKind::Projection:
    case OperatorKind::Reflection: spec.set = f.text("set"); break;
    case OperatorKind::Rotation2D: {
      spec.theta = f.number("theta");
      const auto plane = f.numbers("plane");
      if (plane.size() != 2) invalid(f.path("plane"), "expected two coordinate indices");
      Value tmp;
      tmp.number = plane[0];
      spec.plane_i = Fields::as_count(tmp, f.path("plane") + "[0]");
      tmp.number = plane[1];
      spec.plane_j = Fields::as_count(tmp, f.path("plane") + "[1]");
      break;
    }
    case OperatorKind::AffineMap:
      spec.matrix = f.rows("matrix");
      spec.shift = f.numbers("shift");
      break;
    case OperatorKind::Average:
      spec.lambda = f.number("lambda");
      spec.children.push_back(parse_operator(sections, name + ".inner", visited));
      break;
    case OperatorKind::Compose:
      spec.children.push_back(parse_operator(sections, name + ".first", visited));
      spec.children.push_back(parse_operator(sections, name + ".second", visited));
      break;
    default: break;
  }
  f.reject_unused();
  return spec;
}

Schedule parse_schedule(const Fields& f) {
  const std::string family = f.text("family");
  const std::size_t horizon = f.has("horizon") ? f.count("horizon") : 0;
  return at_path(f.path("family"), [&] {
    if (family == "constant") return Schedule::constant(f.number("alpha"), horizon);
    if (family == "one_over_n_plus_k") {
      const std::size_t k = f.count("k");
      if (k == 0 || k > 1000000) invalid(f.path("k"), "k must be a positive integer");
      return Schedule::one_over_n_plus_k(static_cast<unsigned>(k), horizon);
    }
    if (family == "custom") {
      if (f.has("horizon")) invalid(f.path("horizon"), "custom horizon is the number of values");
      return Schedule::custom(f.numbers("values"));
    }
    invalid(f.path("family"), "unknown schedule family '" + family + "'");
  });
}

Method method_from(const std::string& name) {
  for (auto m : {Method::Picard, Method::KM, Method::Halpern}) {
    if (to_string(m) == name) return m;
  }
  invalid("method", "expected picard, km or halpern");
}

// ---------------------------------------------------------------------------
// Rendering.

std::string render_numbers(std::span<const double> v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_real(v[i]);
  }
  return out + "]";
}

std::string render_vec(const Vec& v) { return render_numbers(v.coords()); }

std::string render_rows(const std::vector<std::vector<double>>& rows) {
  std::string out = "[";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) out += ", ";
    out += render_numbers(rows[i]);
  }
  return out + "]";
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

void render_set(std::ostringstream& out, const std::string& name, const ConvexSet& c) {
  out << "\n[set." << name << "]\n";
  out << "kind = " << to_string(c.kind()) << "\n";
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Ball>) {
          out << "center = " << render_vec(s.center) << "\nradius = " << format_real(s.radius) << "\n";
        } else if constexpr (std::is_same_v<S, Box>) {
          out << "lo = " << render_vec(s.lo) << "\nhi = " << render_vec(s.hi) << "\n";
        } else if constexpr (std::is_same_v<S, Halfspace> || std::is_same_v<S, Hyperplane>) {
          out << "normal = " << render_vec(s.normal) << "\noffset = " << format_real(s.offset) << "\n";
        } else if constexpr (std::is_same_v<S, AffineSubspace>) {
          out << "basepoint = " << render_vec(s.basepoint) << "\n";
          std::vector<std::vector<double>> rows;
          for (const Vec& d : s.directions) rows.emplace_back(d.coords().begin(), d.coords().end());
          out << "directions = " << render_rows(rows) << "\n";
        }
      },
      c.shape());
}

void render_operator(std::ostringstream& out, const std::string& path, const OperatorSpec& op) {
  out << "\n[" << path << "]\n";
  out << "kind = " << to_string(op.kind) << "\n";
  switch (op.kind) {
    case OperatorKind::Projection:
    case OperatorKind::Reflection: out << "set = " << quote(op.set) << "\n"; break;
    case OperatorKind::Rotation2D:
      out << "theta = " << format_real(op.theta) << "\nplane = [" << op.plane_i << ", "
          << op.plane_j << "]\n";
      break;
    case OperatorKind::AffineMap:
      out << "matrix = " << render_rows(op.matrix) << "\nshift = " << render_numbers(op.shift) << "\n";
      break;
    case OperatorKind::Average:
      out << "lambda = " << format_real(op.lambda) << "\n";
      render_operator(out, path + ".inner", op.children.at(0));
      break;
    case OperatorKind::Compose:
      render_operator(out, path + ".first", op.children.at(0));
      render_operator(out, path + ".second", op.children.at(1));
      break;
    default: break;
  }
}

// ---------------------------------------------------------------------------
// Operator construction.

Operator build_spec(const OperatorSpec& spec, const ExperimentConfig& cfg, const std::string& path) {
  auto lookup = [&](const std::string& name) -> const ConvexSet& {
    auto it = cfg.sets.find(name);
    if (it == cfg.sets.end()) invalid(path + ".set", "unknown set '" + name + "'");
    return it->second;
  };
  return at_path(path, [&]() -> Operator {
    switch (spec.kind) {
      case OperatorKind::Identity: return Operator::identity();
      case OperatorKind::NegIdentity: return Operator::neg_identity();
      case OperatorKind::Projection: return Operator::projection(lookup(spec.set));
      case OperatorKind::Reflection: return Operator::reflection(lookup(spec.set));
      case OperatorKind::Rotation2D:
        if (std::max(spec.plane_i, spec.plane_j) >= cfg.dim) invalid(path + ".plane", "index outside dim");
        return Operator::rotation(spec.theta, spec.plane_i, spec.plane_j);
      case OperatorKind::AffineMap: {
        const Matrix m = at_path(path + ".matrix", [&] { return Matrix::from_rows(spec.matrix); });
        if (m.rows != cfg.dim || m.cols != cfg.dim) invalid(path + ".matrix", "must be dim x dim");
        return Operator::affine(m, Fields::to_vec(spec.shift, cfg.dim, path + ".shift"));
      }
      case OperatorKind::Average:
        return Operator::average(build_spec(spec.children.at(0), cfg, path + ".inner"), spec.lambda);
      case OperatorKind::Compose:
        return Operator::compose(build_spec(spec.children.at(0), cfg, path + ".first"),
                                 build_spec(spec.children.at(1), cfg, path + ".second"));
    }
    invalid(path, "unknown operator kind");
  });
}

}  // namespace

Operator build_operator(const ExperimentConfig& cfg) { return build_spec(cfg.op, cfg, "operator"); }

ConvexSet build_domain(const ExperimentConfig& cfg) {
  if (!cfg.domain) return ConvexSet::full(cfg.dim);
  auto it = cfg.sets.find(*cfg.domain);
  if (it == cfg.sets.end()) invalid("domain", "unknown set '" + *cfg.domain + "'");
  return it->second;
}

std::optional<ConvexSet> known_solution_set(const ExperimentConfig& cfg) {
  const auto fix = known_fixed_set(build_operator(cfg), cfg.dim);
  if (!fix) return std::nullopt;
  const ConvexSet domain = build_domain(cfg);
  if (domain.kind() == SetKind::FullSpace) return fix;
  if (fix->kind() == SetKind::FullSpace) return domain;
  if (*fix == domain) return fix;
  return std::nullopt;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.name.empty()) invalid("name", "required");
  if (cfg.dim == 0) invalid("dim", "must be positive");
  for (const auto& [name, set] : cfg.sets) {
    if (set.dim() != cfg.dim) invalid("set." + name, "dimension differs from dim");
  }
  if (cfg.x0.dim() != cfg.dim) invalid("x0", "dimension differs from dim");
  const Operator op = build_operator(cfg);
  const ConvexSet domain = build_domain(cfg);
  if (cfg.method == Method::Halpern && !cfg.u) invalid("u", "u required for method halpern");
  if (cfg.method == Method::KM && !cfg.schedule) invalid("schedule", "schedule required for method km");
  if (cfg.u && cfg.u->dim() != cfg.dim) invalid("u", "dimension differs from dim");
  if (cfg.coupling_x0 && cfg.coupling_x0->dim() != cfg.dim) invalid("coupling_x0", "dimension differs from dim");
  if (cfg.schedule && cfg.schedule->family() == ScheduleFamily::Custom &&
      cfg.schedule->values().size() < cfg.max_iter) {
    invalid("schedule.values", "fewer values than max_iter");
  }
  if (cfg.method != Method::Picard && !contains(domain, cfg.x0, 1e-9)) invalid("x0", "outside domain");
  if (cfg.method == Method::Halpern && !contains(domain, *cfg.u, 1e-9)) invalid("u", "outside domain");
  for (std::size_t i = 0; i < cfg.anchors.size(); ++i) {
    if (cfg.anchors[i].dim() != cfg.dim) invalid("anchors[" + std::to_string(i) + "]", "wrong dimension");
  }
  if (cfg.stop_residual < 0) invalid("stop_residual", "must be nonnegative");
  if (cfg.stop_step < 0) invalid("stop_step", "must be nonnegative");
  if (!(cfg.exp_eps > 0)) invalid("exp_eps", "must be positive");
  if (cfg.tail && *cfg.tail == 0) invalid("tail", "must be positive");

  const auto& names = known_check_names();
  const bool solution_known = known_solution_set(cfg).has_value();
  for (const auto& [check, tol] : cfg.checks) {
    const std::string path = "checks." + check;
    if (std::find(names.begin(), names.end(), check) == names.end()) invalid(path, "unknown check");
    if (!(tol >= 0)) invalid(path, "tolerance must be nonnegative");
    if (check == "key_inequality" && cfg.method != Method::KM) invalid(path, "requires method km");
    if ((check == "coupling" || check == "exp_bound") && cfg.method != Method::Halpern) {
      invalid(path, "requires method halpern");
    }
    if (check == "coupling" && !cfg.coupling_x0) invalid(path, "requires coupling_x0");
    if (check == "exp_bound" && !(cfg.x0 == *cfg.u)) invalid(path, "requires x0 = u");
    if ((check == "exp_bound" || ((check == "limit" || check == "weak_limit") &&
                                  cfg.method == Method::Halpern)) &&
        !solution_known) {
      invalid(path, "fixed-point set of the operator is not known exactly");
    }
    if ((check == "fejer" || check == "fejer_bounded" || check == "key_inequality") &&
        cfg.anchors.empty() && !solution_known) {
      invalid(path, "anchors required: fixed-point set is not known exactly");
    }
  }
}

ExperimentConfig parse_config(const std::string& text) {
  const auto sections = lex(text);
  ExperimentConfig cfg;
  std::vector<std::string> visited{""};

  const Fields top(sections.at(""), "");
  cfg.name = top.text("name");
  cfg.dim = top.count("dim");
  if (cfg.dim == 0) invalid("dim", "must be positive");
  cfg.method = method_from(top.text("method"));
  cfg.x0 = top.vec("x0", cfg.dim);
  if (top.has("u")) cfg.u = top.vec("u", cfg.dim);
  if (top.has("coupling_x0")) cfg.coupling_x0 = top.vec("coupling_x0", cfg.dim);
  if (top.has("anchors")) {
    const auto rows = top.rows("anchors");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      cfg.anchors.push_back(Fields::to_vec(rows[i], cfg.dim, "anchors[" + std::to_string(i) + "]"));
    }
  }
  if (top.has("domain")) cfg.domain = top.text("domain");
  if (top.has("max_iter")) cfg.max_iter = top.count("max_iter");
  cfg.stop_residual = top.number_or("stop_residual", cfg.stop_residual);
  cfg.stop_step = top.number_or("stop_step", cfg.stop_step);
  if (top.has("tail")) cfg.tail = top.count("tail");
  cfg.exp_eps = top.number_or("exp_eps", cfg.exp_eps);
  if (top.has("seed")) cfg.seed = top.count("seed");
  if (top.has("output_dir")) cfg.output_dir = top.text("output_dir");
  if (top.has("expect")) {
    const std::string e = top.text("expect");
    if (e != "pass" && e != "fail") invalid("expect", "expected pass or fail");
    cfg.expect_pass = e == "pass";
  }
  top.reject_unused();

  for (const auto& [name, section] : sections) {
    if (name.rfind("set.", 0) != 0) continue;
    const std::string set_name = name.substr(4);
    if (set_name.empty() || set_name.find('.') != std::string::npos) invalid(name, "bad set name");
    Fields f(section, name);
    cfg.sets.emplace(set_name, parse_set(f, cfg.dim));
    f.reject_unused();
    visited.push_back(name);
  }

  cfg.op = parse_operator(sections, "operator", visited);

  if (auto it = sections.find("schedule"); it != sections.end()) {
    Fields f(it->second, "schedule");
    cfg.schedule = parse_schedule(f);
    f.reject_unused();
    visited.push_back("schedule");
  }
  if (auto it = sections.find("checks"); it != sections.end()) {
    for (const auto& [key, entry] : it->second.entries) {
      cfg.checks[key] = Fields::as_number(entry.value, "checks." + key);
    }
    visited.push_back("checks");
  }
  for (const auto& [name, section] : sections) {
    if (std::find(visited.begin(), visited.end(), name) == visited.end()) {
      invalid(name, "unknown section (line " + std::to_string(section.line) + ")");
    }
  }
  validate_config(cfg);
  return cfg;
}

std::string render_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "name = " << quote(cfg.name) << "\n";
  out << "dim = " << cfg.dim << "\n";
  out << "method = " << to_string(cfg.method) << "\n";
  out << "x0 = " << render_vec(cfg.x0) << "\n";
  if (cfg.u) out << "u = " << render_vec(*cfg.u) << "\n";
  if (cfg.coupling_x0) out << "coupling_x0 = " << render_vec(*cfg.coupling_x0) << "\n";
  if (!cfg.anchors.empty()) {
    std::vector<std::vector<double>> rows;
    for (const Vec& a : cfg.anchors) rows.emplace_back(a.coords().begin(), a.coords().end());
    out << "anchors = " << render_rows(rows) << "\n";
  }
  if (cfg.domain) out << "domain = " << quote(*cfg.domain) << "\n";
  out << "max_iter = " << cfg.max_iter << "\n";
  out << "stop_residual = " << format_real(cfg.stop_residual) << "\n";
  out << "stop_step = " << format_real(cfg.stop_step) << "\n";
  if (cfg.tail) out << "tail = " << *cfg.tail << "\n";
  out << "exp_eps = " << format_real(cfg.exp_eps) << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "output_dir = " << quote(cfg.output_dir) << "\n";
  out << "expect = " << (cfg.expect_pass ? "pass" : "fail") << "\n";
  for (const auto& [name, set] : cfg.sets) render_set(out, name, set);
  render_operator(out, "operator", cfg.op);
  if (cfg.schedule) {
    const Schedule& s = *cfg.schedule;
    out << "\n[schedule]\nfamily = " << to_string(s.family()) << "\n";
    switch (s.family()) {
      case ScheduleFamily::Constant: out << "alpha = " << format_real(s.constant_alpha()) << "\n"; break;
      case ScheduleFamily::OneOverNPlusK: out << "k = " << s.offset() << "\n"; break;
      case ScheduleFamily::Custom: out << "values = " << render_numbers(s.values()) << "\n"; break;
    }
    if (s.family() != ScheduleFamily::Custom && s.declared_horizon() != 0) {
      out << "horizon = " << s.declared_horizon() << "\n";
    }
  }
  if (!cfg.checks.empty()) {
    out << "\n[checks]\n";
    for (const auto& [name, tol] : cfg.checks) out << name << " = " << format_real(tol) << "\n";
  }
  return out.str();
}

}  // namespace fpi

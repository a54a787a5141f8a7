#include "isop/records.hpp"

#include "isop/raster_io.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace isop {

using nlohmann::json;

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::string csv_field(const json& v) {
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }
  return s;
}

// "body@center" -> (body, center or origin)
std::pair<std::string, Point> split_center(const std::string& s, int dim) {
  const auto at = s.find('@');
  if (at == std::string::npos) return {s, Point::Zero(dim)};
  return {s.substr(0, at), parse_point(s.substr(at + 1))};
}

}  // namespace

json to_json(const Estimate& e) {
  json j;
  j["mean"] = number(e.mean);
  j["stderr"] = number(e.std_error);
  j["n"] = e.n;
  j["seed"] = e.seed;
  j["truncated_fraction"] = number(e.truncated_fraction);
  if (!e.warning.empty()) j["warning"] = e.warning;
  return j;
}

json to_json(const Verdict& v) {
  json j;
  j["theorem_id"] = v.theorem_id;
  j["lhs"] = to_json(v.lhs);
  j["rhs"] = to_json(v.rhs);
  j["exact"] = v.exact;
  j["margin"] = number(v.margin);
  j["sigma"] = number(v.sigma);
  j["z"] = number(v.z);
  j["status"] = to_string(v.status);
  j["seed"] = v.seed;
  j["params"] = v.params;
  return j;
}

json make_record(const std::string& op, const json& params, const Estimate& e) {
  json j = to_json(e);
  j["op"] = op;
  j["params"] = params;
  return j;
}

std::string csv_header(const json& record) {
  std::string s;
  for (auto it = record.begin(); it != record.end(); ++it) s += (s.empty() ? "" : ",") + it.key();
  return s;
}

std::string csv_row(const json& record) {
  std::string s;
  bool first = true;
  for (auto it = record.begin(); it != record.end(); ++it) {
    if (!first) s += ',';
    first = false;
    s += csv_field(*it);
  }
  return s;
}

std::string verdict_csv_header() { return "theorem_id,margin,sigma,z,status,seed"; }

std::string verdict_csv_row(const Verdict& v) {
  return csv_field(v.theorem_id) + ',' + number(v.margin).dump() + ',' + number(v.sigma).dump() + ',' +
         number(v.z).dump() + ',' + to_string(v.status) + ',' + std::to_string(v.seed);
}

double parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) throw std::invalid_argument("empty number");
  const auto pi = s.find("pi");
  std::size_t used = 0;
  if (pi == std::string::npos) {
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
    return v;
  }
  const std::string pre = s.substr(0, pi), post = s.substr(pi + 2);
  double coef = 1;
  if (pre == "-") coef = -1;
  else if (!pre.empty() && pre != "+") coef = parse_number(pre);
  double den = 1;
  if (!post.empty()) {
    if (post[0] != '/') throw std::invalid_argument("bad number '" + s + "'");
    den = parse_number(post.substr(1));
  }
  return coef * std::numbers::pi / den;
}

std::vector<double> parse_list(const std::string& s, char sep) {
  std::vector<double> v;
  for (const auto& tok : split(s, sep)) v.push_back(parse_number(tok));
  return v;
}

Point parse_point(const std::string& s) {
  const auto v = parse_list(s);
  if (v.empty() || v.size() > static_cast<std::size_t>(kMaxDim))
    throw std::invalid_argument("point needs 1 to 3 coordinates: '" + s + "'");
  Point p(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p(static_cast<int>(i)) = v[i];
  return p;
}

namespace {

const json& require_key(const json& p, const std::string& key) {
  if (!p.contains(key)) throw std::invalid_argument("missing parameter '" + key + "'");
  return p.at(key);
}

double as_number(const json& v, const std::string& key) {
  if (v.is_string()) return parse_number(v.get<std::string>());
  if (v.is_number()) return v.get<double>();
  if (v.is_boolean()) return v.get<bool>() ? 1.0 : 0.0;
  throw std::invalid_argument("parameter '" + key + "' must be a number");
}

}  // namespace

double param_number(const json& p, const std::string& key) { return as_number(require_key(p, key), key); }

double param_number(const json& p, const std::string& key, double def) {
  return p.contains(key) ? as_number(p.at(key), key) : def;
}

std::vector<double> param_list(const json& p, const std::string& key) {
  const json& v = require_key(p, key);
  if (v.is_string()) return parse_list(v.get<std::string>());
  if (v.is_number()) return {v.get<double>()};
  std::vector<double> out;
  for (const auto& x : v) out.push_back(as_number(x, key));
  return out;
}

std::string param_string(const json& p, const std::string& key) {
  const json& v = require_key(p, key);
  return v.is_string() ? v.get<std::string>() : v.dump();
}

std::string param_string(const json& p, const std::string& key, const std::string& def) {
  return p.contains(key) ? param_string(p, key) : def;
}

Point param_point(const json& p, const std::string& key) {
  const auto v = param_list(p, key);
  if (v.empty() || v.size() > static_cast<std::size_t>(kMaxDim))
    throw std::invalid_argument("parameter '" + key + "' needs 1 to 3 coordinates");
  Point x(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<int>(i)) = v[i];
  return x;
}

BallShape parse_ball(const std::string& spec, int dim) {
  std::string s = spec;
  if (s.rfind("ball:", 0) == 0) s = s.substr(5);
  auto [body, c] = split_center(s, dim);
  const double r = parse_number(body);
  if (!(r > 0)) throw std::invalid_argument("ball radius must be > 0");
  return {c, r};
}

Domain parse_domain(const std::string& spec, int dim) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("domain spec needs kind:args, got '" + spec + "'");
  const std::string kind = spec.substr(0, colon), args = spec.substr(colon + 1);
  if (kind == "ball") {
    const BallShape b = parse_ball(args, dim);
    return Domain::ball(b.center, b.radius);
  }
  if (kind == "annulus") {
    auto [body, c] = split_center(args, 2);
    const auto r = parse_list(body);
    if (r.size() != 2) throw std::invalid_argument("annulus needs r1,r2");
    return Domain::annulus(c, r[0], r[1]);
  }
  if (kind == "rectangle") {
    const auto at = args.find('@');
    const auto w = parse_list(args.substr(0, at));
    const int d = static_cast<int>(w.size());
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("rectangle needs 1 to 3 side lengths");
    const Point c = at == std::string::npos ? Point(Point::Zero(d)) : parse_point(args.substr(at + 1));
    if (c.size() != d) throw std::invalid_argument("rectangle center dimension mismatch");
    Point lo(d), hi(d);
    for (int k = 0; k < d; ++k) {
      lo(k) = c(k) - 0.5 * w[static_cast<std::size_t>(k)];
      hi(k) = c(k) + 0.5 * w[static_cast<std::size_t>(k)];
    }
    return Domain::box(lo, hi);
  }
  if (kind == "polygon") {
    const auto v = parse_list(args);
    if (v.size() % 2 || v.size() < 6) throw std::invalid_argument("polygon needs at least 3 vertex pairs");
    std::vector<Eigen::Vector2d> pts;
    for (std::size_t i = 0; i < v.size(); i += 2) pts.emplace_back(v[i], v[i + 1]);
    return Domain::polygon(std::move(pts));
  }
  if (kind == "slit-disk") {
    const auto parts = split(args, ';');
    if (parts.size() != 2) throw std::invalid_argument("slit-disk needs a;angles");
    return Domain::slit_disk(parse_list(parts[1]), parse_number(parts[0]));
  }
  if (kind == "ball-union" || kind == "ball-intersection") {
    std::vector<BallShape> balls;
    for (const auto& b : split(args, '|')) balls.push_back(parse_ball(b, dim));
    return kind == "ball-union" ? Domain::ball_union(std::move(balls)) : Domain::ball_intersection(std::move(balls));
  }
  if (kind == "channel") {
    const auto parts = split(args, ';');
    if (parts.size() != 2) throw std::invalid_argument("channel needs xs;widths");
    return Domain::channel(parse_list(parts[0]), parse_list(parts[1]));
  }
  if (kind == "raster") {
    const auto parts = split(args, ';');
    const double outer = parts.size() > 1 ? parse_number(parts[1]) : 0.0;
    return Domain::raster(read_raster(parts[0]), outer);
  }
  throw std::invalid_argument("unknown domain kind '" + kind + "'");
}

}  // namespace isop

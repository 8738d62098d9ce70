#include "shellhom/config.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "shellhom/errors.hpp"

namespace shellhom {
namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string strip_comment(const std::string& line) {
  const size_t pos = line.find_first_of("#;");
  return pos == std::string::npos ? line : line.substr(0, pos);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_commas(const std::string& s, int line) {
  std::vector<std::string> out;
  size_t begin = 0;
  while (true) {
    const size_t comma = s.find(',', begin);
    const std::string item =
        trim(s.substr(begin, comma == std::string::npos ? comma : comma - begin));
    if (item.empty())
      throw ConfigError("line " + std::to_string(line) + ": empty list entry");
    out.push_back(item);
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

double parse_plain(const std::string& tok, int line) {
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    fail(line, "not a number: '" + tok + "'");
  }
  if (pos != tok.size()) fail(line, "not a number: '" + tok + "'");
  return v;
}

// decimal, scientific, or rational p/q
double parse_number(const std::string& tok, int line) {
  const size_t slash = tok.find('/');
  if (slash != std::string::npos) {
    const double p = parse_plain(tok.substr(0, slash), line);
    const double q = parse_plain(tok.substr(slash + 1), line);
    if (q == 0.0) fail(line, "zero denominator in '" + tok + "'");
    return p / q;
  }
  return parse_plain(tok, line);
}

long parse_int(const std::string& tok, int line) {
  size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(tok, &pos);
  } catch (const std::exception&) {
    fail(line, "not an integer: '" + tok + "'");
  }
  if (pos != tok.size()) fail(line, "not an integer: '" + tok + "'");
  return v;
}

enum class Unit { Length, Pressure, BodyForce };

const char* unit_name(Unit kind) {
  switch (kind) {
    case Unit::Length: return "length";
    case Unit::Pressure: return "pressure";
    case Unit::BodyForce: return "body-force";
  }
  return "";
}

std::optional<double> unit_factor(Unit kind, const std::string& word) {
  switch (kind) {
    case Unit::Length:
      if (word == "m") return 1.0;
      if (word == "cm") return 1e-2;
      if (word == "mm") return 1e-3;
      break;
    case Unit::Pressure:
      if (word == "Pa") return 1.0;
      if (word == "kPa") return 1e3;
      if (word == "MPa") return 1e6;
      if (word == "GPa") return 1e9;
      break;
    case Unit::BodyForce:
      if (word == "N/m3" || word == "N/m^3") return 1.0;
      if (word == "N/cm3" || word == "N/cm^3") return 1e6;
      break;
  }
  return std::nullopt;
}

// number + required unit word -> SI
double parse_quantity(const std::string& value, Unit kind, int line) {
  const auto tok = split_ws(value);
  if (tok.size() != 2)
    fail(line, "expected '<number> <" + std::string(unit_name(kind)) +
                   " unit>', got '" + trim(value) + "'");
  const auto f = unit_factor(kind, tok[1]);
  if (!f) fail(line, "unknown " + std::string(unit_name(kind)) + " unit '" +
                         tok[1] + "'");
  return parse_number(tok[0], line) * *f;
}

// three numbers with one trailing unit; the unit may be omitted only for an
// all-zero vector, where the scale cannot matter
Vec3 parse_vec3(const std::string& value, Unit kind, int line) {
  auto tok = split_ws(value);
  double factor = 1.0;
  bool have_unit = false;
  if (tok.size() == 4) {
    const auto f = unit_factor(kind, tok[3]);
    if (!f) fail(line, "unknown " + std::string(unit_name(kind)) + " unit '" +
                           tok[3] + "'");
    factor = *f;
    have_unit = true;
    tok.pop_back();
  }
  if (tok.size() != 3)
    fail(line, "expected three numbers and a " +
                   std::string(unit_name(kind)) + " unit");
  Vec3 v;
  for (int i = 0; i < 3; ++i) v[i] = parse_number(tok[i], line);
  if (!have_unit && v.cwiseAbs().maxCoeff() != 0.0)
    fail(line, "a nonzero vector needs a " + std::string(unit_name(kind)) +
                   " unit");
  return v * factor;
}

// unitless 3-vector (cell coordinates)
Vec3 parse_vec3_plain(const std::string& value, int line) {
  const auto tok = split_ws(value);
  if (tok.size() != 3) fail(line, "expected three numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) v[i] = parse_number(tok[i], line);
  return v;
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

using Section = std::map<std::string, Entry>;

std::map<std::string, Section> parse_ini(const std::string& text) {
  std::map<std::string, Section> out;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) fail(line, "empty section name");
      if (out.count(section)) fail(line, "duplicate section [" + section + "]");
      out[section];
      continue;
    }
    const size_t eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    if (section.empty()) fail(line, "key before any [section]");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) fail(line, "empty key");
    if (value.empty()) fail(line, "empty value for '" + key + "'");
    auto [it, fresh] = out[section].emplace(key, Entry{value, line, false});
    if (!fresh) fail(line, "duplicate key '" + key + "' in [" + section + "]");
  }
  return out;
}

// lookup that records use so leftovers can be reported as unknown keys
const Entry* find(Section& sec, const std::string& key) {
  auto it = sec.find(key);
  if (it == sec.end()) return nullptr;
  it->second.used = true;
  return &it->second;
}

const Entry& require(Section& sec, const std::string& section,
                     const std::string& key) {
  const Entry* e = find(sec, key);
  if (!e) throw ConfigError("[" + section + "] is missing '" + key + "'");
  return *e;
}

void reject_leftovers(const Section& sec, const std::string& section) {
  for (const auto& [key, entry] : sec)
    if (!entry.used)
      fail(entry.line, "unknown key '" + key + "' in [" + section + "]");
}

int parse_phase_id(const std::string& tok, int line) {
  const long p = parse_int(tok, line);
  if (p < 1) fail(line, "phase ids count from 1, got " + tok);
  return static_cast<int>(p - 1);
}

void load_geometry(Section& sec, RunConfig& cfg) {
  const Entry& model = require(sec, "geometry", "model");
  const Entry* r1 = find(sec, "radius1");
  const Entry* r2 = find(sec, "radius2");
  if (model.value == "plate") {
    if (r1 || r2)
      fail(model.line, "plate model takes no radius keys");
    cfg.model = PlateMetric{};
  } else if (model.value == "cylindrical") {
    if (r1) fail(r1->line, "cylindrical model takes radius2 only");
    if (!r2) fail(model.line, "cylindrical model needs radius2");
    cfg.model = CylindricalMetric{parse_quantity(r2->value, Unit::Length, r2->line)};
  } else if (model.value == "doubly_curved") {
    if (!r1 || !r2) fail(model.line, "doubly_curved model needs radius1 and radius2");
    cfg.model = DoublyCurvedMetric{parse_quantity(r1->value, Unit::Length, r1->line),
                                   parse_quantity(r2->value, Unit::Length, r2->line)};
  } else {
    fail(model.line, "unknown model '" + model.value + "'");
  }

  const Entry& extent = require(sec, "geometry", "extent");
  const Vec3 L = parse_vec3(extent.value, Unit::Length, extent.line);
  for (int i = 0; i < 3; ++i) {
    if (!(L[i] > 0.0)) fail(extent.line, "extent components must be positive");
    cfg.domain.range[i] = {0.0, L[i]};
  }
  reject_leftovers(sec, "geometry");
}

void load_cell(Section& sec, RunConfig& cfg) {
  if (const Entry* n = find(sec, "n")) {
    const long v = parse_int(n->value, n->line);
    if (v < 1) fail(n->line, "cell n must be at least 1");
    cfg.cell_n = static_cast<int>(v);
  }

  const Entry& geom = require(sec, "cell", "geometry");
  const Entry* axis = find(sec, "axis");
  const Entry* layers = find(sec, "layers");
  const Entry* center = find(sec, "center");
  const Entry* half = find(sec, "half");
  const Entry* radius = find(sec, "radius");
  const Entry* iphase = find(sec, "inclusion_phase");
  auto forbid = [&](const Entry* e, const char* key) {
    if (e) fail(e->line, std::string("'") + key + "' does not apply to geometry '" +
                             geom.value + "'");
  };
  if (geom.value == "uniform") {
    forbid(axis, "axis"); forbid(layers, "layers"); forbid(center, "center");
    forbid(half, "half"); forbid(radius, "radius");
    forbid(iphase, "inclusion_phase");
    cfg.phase = Uniform{};
  } else if (geom.value == "laminate") {
    forbid(center, "center"); forbid(half, "half"); forbid(radius, "radius");
    forbid(iphase, "inclusion_phase");
    Laminate lam;
    if (axis) {
      const long a = parse_int(axis->value, axis->line);
      if (a < 1 || a > 3) fail(axis->line, "axis must be 1, 2, or 3");
      lam.axis = static_cast<int>(a - 1);
    }
    if (!layers) fail(geom.line, "laminate geometry needs 'layers'");
    double total = 0.0;
    for (const std::string& tok : split_ws(layers->value)) {
      const size_t colon = tok.find(':');
      if (colon == std::string::npos)
        fail(layers->line, "layer entries are fraction:phase, got '" + tok + "'");
      const double f = parse_number(tok.substr(0, colon), layers->line);
      if (!(f > 0.0)) fail(layers->line, "layer fractions must be positive");
      lam.layers.emplace_back(f, parse_phase_id(tok.substr(colon + 1), layers->line));
      total += f;
    }
    if (std::fabs(total - 1.0) > 1e-9)
      fail(layers->line, "layer fractions must sum to 1");
    cfg.phase = lam;
  } else if (geom.value == "box" || geom.value == "sphere") {
    forbid(axis, "axis"); forbid(layers, "layers");
    Vec3 c(0.5, 0.5, 0.5);
    if (center) c = parse_vec3_plain(center->value, center->line);
    const int p = iphase ? parse_phase_id(iphase->value, iphase->line) : 1;
    if (geom.value == "box") {
      forbid(radius, "radius");
      if (!half) fail(geom.line, "box geometry needs 'half'");
      const Vec3 h = parse_vec3_plain(half->value, half->line);
      if (!(h.minCoeff() > 0.0)) fail(half->line, "half widths must be positive");
      cfg.phase = BoxInclusion{c, h, p};
    } else {
      forbid(half, "half");
      if (!radius) fail(geom.line, "sphere geometry needs 'radius'");
      const double r = parse_number(radius->value, radius->line);
      if (!(r > 0.0)) fail(radius->line, "radius must be positive");
      cfg.phase = SphereInclusion{c, r, p};
    }
  } else {
    fail(geom.line, "unknown cell geometry '" + geom.value + "'");
  }

  const Entry& E = require(sec, "cell", "E");
  const Entry& nu = require(sec, "cell", "nu");
  const auto Es = split_commas(E.value, E.line);
  const auto nus = split_commas(nu.value, nu.line);
  if (Es.size() != nus.size())
    fail(nu.line, "E lists " + std::to_string(Es.size()) + " phases but nu lists " +
                      std::to_string(nus.size()));
  cfg.materials.clear();
  for (size_t p = 0; p < Es.size(); ++p) {
    Material m;
    m.C = isotropic_tensor(parse_quantity(Es[p], Unit::Pressure, E.line),
                           parse_number(nus[p], nu.line));
    cfg.materials.push_back(m);
  }
  if (const Entry* yield = find(sec, "yield")) {
    const auto ys = split_commas(yield->value, yield->line);
    if (ys.size() != cfg.materials.size())
      fail(yield->line, "yield must list one value per phase");
    for (size_t p = 0; p < ys.size(); ++p) {
      const double y = parse_quantity(ys[p], Unit::Pressure, yield->line);
      if (!(y > 0.0)) fail(yield->line, "yield strengths must be positive");
      cfg.materials[p].yield_strength = y;
    }
  }

  const int used = max_phase(cfg.phase);
  if (used >= static_cast<int>(cfg.materials.size()))
    throw ConfigError("material " + std::to_string(used + 1) +
                      " is referenced by the cell geometry but not defined");
  reject_leftovers(sec, "cell");
}

void load_macro(Section& sec, RunConfig& cfg) {
  const Entry& div = require(sec, "macro", "divisions");
  const auto tok = split_ws(div.value);
  if (tok.size() != 3) fail(div.line, "divisions needs three integers");
  for (int i = 0; i < 3; ++i) {
    const long v = parse_int(tok[i], div.line);
    if (v < 1) fail(div.line, "divisions must be at least 1");
    cfg.macro_divisions[i] = static_cast<int>(v);
  }

  if (const Entry* reps = find(sec, "representatives")) {
    const long v = parse_int(reps->value, reps->line);
    if (v < 1) fail(reps->line, "representatives must be at least 1");
    cfg.representatives = static_cast<int>(v);
  }

  static constexpr const char* kFaceKey[6] = {"face_x_min", "face_x_max",
                                              "face_y_min", "face_y_max",
                                              "face_z_min", "face_z_max"};
  for (int f = 0; f < 6; ++f) {
    const Entry* e = find(sec, kFaceKey[f]);
    if (!e) continue;
    const auto w = split_ws(e->value);
    FaceCondition& fc = cfg.problem.faces[f];
    if (w.size() == 1 && w[0] == "free") {
      fc.kind = FaceCondition::Free;
    } else if (w.size() == 1 && w[0] == "clamped") {
      fc.kind = FaceCondition::Dirichlet;
    } else if (!w.empty() && w[0] == "traction") {
      fc.kind = FaceCondition::Traction;
      fc.value = parse_vec3(e->value.substr(e->value.find("traction") + 8),
                            Unit::Pressure, e->line);
    } else {
      fail(e->line, "face conditions are 'free', 'clamped', or 'traction tx ty tz'");
    }
  }

  if (const Entry* body = find(sec, "body"))
    cfg.problem.body_force = parse_vec3(body->value, Unit::BodyForce, body->line);
  reject_leftovers(sec, "macro");
}

void load_reconstruct(Section& sec, RunConfig& cfg) {
  const Entry& eps = require(sec, "reconstruct", "epsilon");
  cfg.epsilon = parse_quantity(eps.value, Unit::Length, eps.line);
  if (!(cfg.epsilon > 0.0)) fail(eps.line, "epsilon must be positive");
  if (const Entry* order = find(sec, "order")) {
    const long v = parse_int(order->value, order->line);
    if (v < 0 || v > 2) fail(order->line, "order must be 0, 1, or 2");
    cfg.order = static_cast<int>(v);
  }
  if (const Entry* res = find(sec, "resolution")) {
    const long v = parse_int(res->value, res->line);
    if (v < 1) fail(res->line, "resolution must be at least 1");
    cfg.resolution = static_cast<int>(v);
  }
  reject_leftovers(sec, "reconstruct");
}

void load_strength(Section& sec, RunConfig& cfg) {
  if (const Entry* m = find(sec, "method")) {
    if (m->value == "direct")
      cfg.method = SearchMethod::Direct;
    else if (m->value == "bisection")
      cfg.method = SearchMethod::Bisection;
    else
      fail(m->line, "method is 'direct' or 'bisection'");
  }
  if (const Entry* b = find(sec, "bracket")) {
    cfg.bracket_init = parse_number(b->value, b->line);
    if (!(cfg.bracket_init > 0.0)) fail(b->line, "bracket must be positive");
  }
  if (const Entry* t = find(sec, "tolerance")) {
    cfg.search_tol = parse_number(t->value, t->line);
    if (!(cfg.search_tol > 0.0)) fail(t->line, "tolerance must be positive");
  }
  if (const Entry* o = find(sec, "order")) {
    const long v = parse_int(o->value, o->line);
    if (v < 0 || v > 2) fail(o->line, "order must be 0, 1, or 2");
    cfg.strength_order = static_cast<int>(v);
  }
  bool any_yield = false;
  for (const Material& m : cfg.materials) any_yield |= m.yield_strength > 0.0;
  if (!any_yield)
    throw ConfigError("[strength] needs 'yield' values in [cell]");
  reject_leftovers(sec, "strength");
}

void load_output(Section& sec, RunConfig& cfg) {
  if (const Entry* d = find(sec, "directory")) cfg.out_dir = d->value;
  if (const Entry* f = find(sec, "formats")) {
    cfg.out_archive = cfg.out_vtk = cfg.out_csv = false;
    for (const std::string& w : split_ws(f->value)) {
      bool* flag = w == "archive" ? &cfg.out_archive
                   : w == "vtk"   ? &cfg.out_vtk
                   : w == "csv"   ? &cfg.out_csv
                                  : nullptr;
      if (!flag) fail(f->line, "unknown format '" + w + "'");
      if (*flag) fail(f->line, "format '" + w + "' listed twice");
      *flag = true;
    }
    if (!cfg.out_archive && !cfg.out_vtk && !cfg.out_csv)
      fail(f->line, "formats must name at least one of archive, vtk, csv");
  }
  reject_leftovers(sec, "output");
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  auto ini = parse_ini(text);
  RunConfig cfg;
  cfg.hash = config_hash(text);

  static constexpr const char* kSections[] = {"geometry", "cell",     "macro",
                                              "reconstruct", "strength", "output"};
  for (const auto& [name, sec] : ini) {
    bool known = false;
    for (const char* s : kSections) known |= name == s;
    if (!known) throw ConfigError("unknown section [" + name + "]");
  }

  auto section = [&](const char* name) -> Section* {
    auto it = ini.find(name);
    return it == ini.end() ? nullptr : &it->second;
  };
  Section* geometry = section("geometry");
  Section* cell = section("cell");
  Section* macro = section("macro");
  if (!geometry) throw ConfigError("missing required section [geometry]");
  if (!cell) throw ConfigError("missing required section [cell]");
  if (!macro) throw ConfigError("missing required section [macro]");

  load_geometry(*geometry, cfg);
  load_cell(*cell, cfg);
  load_macro(*macro, cfg);
  if (Section* s = section("reconstruct")) load_reconstruct(*s, cfg);
  if (Section* s = section("strength")) load_strength(*s, cfg);
  if (Section* s = section("output")) load_output(*s, cfg);

  // a configured period must tile every axis; diagnoses the bad axis
  if (cfg.epsilon > 0.0) period_counts(cfg.domain, cfg.epsilon);
  return cfg;
}

std::uint64_t config_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&](char c) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  };
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    for (char c : s) mix(c);
    mix('\n');
  }
  return h;
}

}  // namespace shellhom

#include "bloch/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

namespace bloch {

using nlohmann::json;

namespace {

std::string join_lines(const std::vector<std::string>& v) {
  std::string s = "invalid configuration:";
  for (const auto& p : v) s += "\n  " + p;
  return s;
}

class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); }

  void unknown_keys(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
    if (!obj.is_object()) return;
    std::set<std::string> k(known.begin(), known.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!k.count(it.key())) fail(join(path, it.key()), "unknown field");
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  const json* field(const json& obj, const std::string& key) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
  }

  int integer(const json& obj, const std::string& path, const std::string& key, int def, int lo, int hi = 1 << 30) {
    const json* v = field(obj, key);
    if (!v) return def;
    const std::string p = join(path, key);
    if (!v->is_number_integer()) {
      fail(p, "expected an integer");
      return def;
    }
    const long long x = v->get<long long>();
    if (x < lo || x > hi) {
      fail(p, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "] (got " + std::to_string(x) + ")");
      return def;
    }
    return static_cast<int>(x);
  }

  double number(const json& obj, const std::string& path, const std::string& key, double def) {
    const json* v = field(obj, key);
    if (!v) return def;
    if (!v->is_number()) {
      fail(join(path, key), "expected a number");
      return def;
    }
    const double x = v->get<double>();
    if (!std::isfinite(x)) fail(join(path, key), "must be finite");
    return x;
  }

  double positive(const json& obj, const std::string& path, const std::string& key, double def) {
    const double x = number(obj, path, key, def);
    if (!(x > 0.0)) fail(join(path, key), "must be > 0");
    return x;
  }

  std::string string(const json& obj, const std::string& path, const std::string& key, const std::string& def) {
    const json* v = field(obj, key);
    if (!v) return def;
    if (!v->is_string()) {
      fail(join(path, key), "expected a string");
      return def;
    }
    return v->get<std::string>();
  }

  std::vector<double> vector(const json& v, const std::string& path, std::size_t size) {
    std::vector<double> out;
    if (!v.is_array()) {
      fail(path, "expected an array");
      return out;
    }
    if (size && v.size() != size) fail(path, "expected " + std::to_string(size) + " entries");
    for (const auto& x : v) {
      if (!x.is_number() || !std::isfinite(x.get<double>())) {
        fail(path, "entries must be finite numbers");
        return {};
      }
      out.push_back(x.get<double>());
    }
    return out;
  }

  TrigPolynomial polynomial(const json& v, const std::string& path, int dim) {
    if (v.is_number()) return TrigPolynomial::constant(dim, v.get<double>());
    if (!v.is_object()) {
      fail(path, "expected a number or {constant, terms}");
      return TrigPolynomial::constant(dim, 0.0);
    }
    unknown_keys(v, path, {"constant", "terms", "form", "kind"});
    const double c = number(v, path, "constant", 0.0);
    std::vector<TrigTerm> terms;
    if (const json* t = field(v, "terms")) {
      if (!t->is_array()) fail(join(path, "terms"), "expected an array");
      else
        for (std::size_t i = 0; i < t->size(); ++i) {
          const json& e = (*t)[i];
          const std::string p = join(path, "terms") + "[" + std::to_string(i) + "]";
          unknown_keys(e, p, {"wave", "cos", "sin"});
          TrigTerm term;
          const json* w = field(e, "wave");
          if (!w || !w->is_array() || static_cast<int>(w->size()) != dim) {
            fail(join(p, "wave"), "expected " + std::to_string(dim) + " integers");
            continue;
          }
          for (const auto& x : *w) {
            if (!x.is_number_integer()) {
              fail(join(p, "wave"), "expected integers");
              break;
            }
            term.wave.push_back(x.get<int>());
          }
          term.cos_coef = number(e, p, "cos", 0.0);
          term.sin_coef = number(e, p, "sin", 0.0);
          terms.push_back(term);
        }
    }
    return TrigPolynomial(dim, c, std::move(terms));
  }
};

json polynomial_json(const TrigPolynomial& p) {
  json terms = json::array();
  for (const auto& t : p.terms()) terms.push_back({{"wave", t.wave}, {"cos", t.cos_coef}, {"sin", t.sin_coef}});
  return {{"constant", p.constant_term()}, {"terms", terms}};
}

std::vector<double> default_center(int dim, int grid) {
  const double h = kTwoPi / grid;
  return std::vector<double>(dim, std::numbers::pi + h / 2);
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_lines(problems)), problems_(std::move(problems)) {}

std::vector<double> parse_tau_list(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(x)) throw std::invalid_argument("tau: cannot read '" + s + "'");
    return x;
  };
  std::vector<double> out;
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(number(item));
    if (out.empty()) throw std::invalid_argument("tau: empty list");
    return out;
  }
  const double a = number(text.substr(0, dots));
  std::string rest = text.substr(dots + 2);
  const auto colon = rest.find(':');
  if (colon != std::string::npos) {
    const double b = number(rest.substr(0, colon));
    const double step = number(rest.substr(colon + 1));
    if (!(step > 0.0) || b < a) throw std::invalid_argument("tau: range a..b:step needs a <= b and step > 0");
    const int count = static_cast<int>(std::floor((b - a) / step + 1e-9));
    for (int i = 0; i <= count; ++i) out.push_back(a + i * step);
    return out;
  }
  const double b = number(rest);
  if (!(a > 0.0) || b < a) throw std::invalid_argument("tau: doubling range a..b needs 0 < a <= b");
  for (double t = a; t <= b * (1.0 + 1e-12); t *= 2.0) out.push_back(t);
  return out;
}

ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("document: ") + e.what()});
  }
  if (!doc.is_object()) throw ConfigError({"document: expected a JSON object"});

  Reader r;
  ExperimentConfig c;
  r.unknown_keys(doc, "", {"dimension", "grid", "J", "K", "K_max", "metric", "potential", "tau", "theta_path", "seed",
                           "threads", "tolerances", "lp", "series", "bands", "gelfand", "cluster_max",
                           "split_epsilon", "candidates", "descent_steps", "factor", "output"});
  c.dimension = r.integer(doc, "", "dimension", 3, 2, 4);
  c.grid = r.integer(doc, "", "grid", 16, 4, 512);
  if (c.grid % 2) r.fail("grid", "must be even");
  c.J = r.integer(doc, "", "J", 16, 0, 4096);
  c.K = r.integer(doc, "", "K", 64, 1, 1 << 16);
  c.K_max = r.integer(doc, "", "K_max", 4, 0, 256);
  const int n = c.dimension;

  // metric
  c.metric.conformal = ScalarField::one(n);
  if (const json* m = r.field(doc, "metric")) {
    r.unknown_keys(*m, "metric", {"kind", "conformal", "g0"});
    const std::string kind = r.string(*m, "metric", "kind", "flat");
    if (kind == "flat") {
      if (r.field(*m, "conformal") || r.field(*m, "g0")) r.fail("metric", "a flat metric takes no conformal factor or g0");
    } else if (kind == "transversal") {
      c.metric.kind = MetricConfig::Kind::transversal;
      if (const json* cf = r.field(*m, "conformal")) {
        std::string form = "trig";
        if (cf->is_object()) form = r.string(*cf, "metric.conformal", "form", "trig");
        if (form != "trig" && form != "exp") r.fail("metric.conformal.form", "expected 'trig' or 'exp'");
        c.metric.conformal.kind = form == "exp" ? ScalarField::Kind::exp_trig : ScalarField::Kind::trig;
        c.metric.conformal.poly = r.polynomial(*cf, "metric.conformal", n);
      }
      const int d = n - 1;
      const json* g = r.field(*m, "g0");
      if (!g) {
        c.metric.g0.assign(d, std::vector<TrigPolynomial>(d, TrigPolynomial::constant(d, 0.0)));
        for (int a = 0; a < d; ++a) c.metric.g0[a][a] = TrigPolynomial::constant(d, 1.0);
      } else if (!g->is_array() || static_cast<int>(g->size()) != d) {
        r.fail("metric.g0", "expected a " + std::to_string(d) + " x " + std::to_string(d) + " array");
      } else {
        c.metric.g0.assign(d, {});
        for (int a = 0; a < d; ++a) {
          const json& row = (*g)[a];
          const std::string p = "metric.g0[" + std::to_string(a) + "]";
          if (!row.is_array() || static_cast<int>(row.size()) != d) {
            r.fail(p, "expected " + std::to_string(d) + " entries");
            c.metric.g0[a].assign(d, TrigPolynomial::constant(d, 0.0));
            continue;
          }
          for (int b = 0; b < d; ++b)
            c.metric.g0[a].push_back(r.polynomial(row[b], p + "[" + std::to_string(b) + "]", d));
        }
      }
    } else {
      r.fail("metric.kind", "expected 'flat' or 'transversal' (got '" + kind + "')");
    }
  }

  // potential
  if (const json* q = r.field(doc, "potential")) {
    r.unknown_keys(*q, "potential", {"kind", "constant", "terms", "amplitude", "alpha", "center", "file"});
    const std::string kind = r.string(*q, "potential", "kind", "zero");
    Potential& pot = c.potential.potential;
    if (kind == "zero") {
      pot = Potential::none();
    } else if (kind == "trig") {
      pot = Potential::trigonometric(r.polynomial(*q, "potential", n));
    } else if (kind == "singular") {
      SingularPower s;
      s.amplitude = r.number(*q, "potential", "amplitude", 1.0);
      s.alpha = r.number(*q, "potential", "alpha", 1.5);
      if (!(s.alpha > 0.0)) r.fail("potential.alpha", "must be > 0");
      if (!(s.alpha < 2.0)) {
        std::ostringstream os;
        os << "must be < 2 so that |x|^-alpha lies in L^{n/2} (got " << s.alpha << ")";
        r.fail("potential.alpha", os.str());
      }
      if (const json* ctr = r.field(*q, "center")) s.center = r.vector(*ctr, "potential.center", n);
      else s.center = default_center(n, c.grid);
      pot = Potential::power(s);
    } else if (kind == "samples") {
      const std::string file = r.string(*q, "potential", "file", "");
      if (file.empty()) {
        r.fail("potential.file", "required for kind 'samples'");
      } else {
        std::filesystem::path p(file);
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        if (!std::filesystem::exists(p)) r.fail("potential.file", "no such file '" + p.string() + "'");
        c.potential.file = std::filesystem::absolute(p).lexically_normal().string();
      }
      pot.kind = Potential::Kind::samples;
    } else {
      r.fail("potential.kind", "expected zero, trig, singular or samples (got '" + kind + "')");
    }
  }

  if (const json* t = r.field(doc, "tau")) {
    if (t->is_string()) {
      try {
        c.tau = parse_tau_list(t->get<std::string>());
      } catch (const std::exception& e) {
        const std::string m = e.what();
        r.fail("tau", m.rfind("tau: ", 0) == 0 ? m.substr(5) : m);
      }
    } else {
      c.tau = r.vector(*t, "tau", 0);
    }
  }
  if (const json* t = r.field(doc, "theta_path")) {
    if (!t->is_array()) r.fail("theta_path", "expected an array of vectors");
    else
      for (std::size_t i = 0; i < t->size(); ++i)
        c.theta_path.push_back(r.vector((*t)[i], "theta_path[" + std::to_string(i) + "]", n));
  }
  if (const json* s = r.field(doc, "seed")) {
    if (!s->is_number_unsigned()) r.fail("seed", "expected a non-negative integer");
    else c.seed = s->get<std::uint64_t>();
  }
  c.threads = r.integer(doc, "", "threads", 1, 1, 1024);

  const json empty = json::object();
  const json* tol = r.field(doc, "tolerances");
  const json& to = tol ? *tol : empty;
  r.unknown_keys(to, "tolerances", {"zero", "quasiperiodicity", "unitarity", "direct_integral", "conformal"});
  c.tolerances.zero = r.positive(to, "tolerances", "zero", c.tolerances.zero);
  c.tolerances.quasiperiodicity = r.positive(to, "tolerances", "quasiperiodicity", c.tolerances.quasiperiodicity);
  c.tolerances.unitarity = r.positive(to, "tolerances", "unitarity", c.tolerances.unitarity);
  c.tolerances.direct_integral = r.positive(to, "tolerances", "direct_integral", c.tolerances.direct_integral);
  c.tolerances.conformal = r.positive(to, "tolerances", "conformal", c.tolerances.conformal);

  const json* lp = r.field(doc, "lp");
  const json& lo = lp ? *lp : empty;
  r.unknown_keys(lo, "lp", {"restarts", "iterations"});
  c.lp.restarts = r.integer(lo, "lp", "restarts", c.lp.restarts, 1, 100000);
  c.lp.iterations = r.integer(lo, "lp", "iterations", c.lp.iterations, 0, 100000);

  const json* se = r.field(doc, "series");
  const json& so = se ? *se : empty;
  r.unknown_keys(so, "series", {"m_max", "m_exact"});
  c.series.m_max = r.integer(so, "series", "m_max", c.series.m_max, 1, 10000000);
  c.series.m_exact = r.integer(so, "series", "m_exact", c.series.m_exact, 0, 2000);

  const json* bd = r.field(doc, "bands");
  const json& bo = bd ? *bd : empty;
  r.unknown_keys(bo, "bands", {"count", "half_width"});
  c.bands.count = r.integer(bo, "bands", "count", c.bands.count, 1, 100000);
  if (const json* hw = r.field(bo, "half_width")) {
    if (!hw->is_array() || static_cast<int>(hw->size()) != n) {
      r.fail("bands.half_width", "expected " + std::to_string(n) + " integers");
    } else {
      for (const auto& x : *hw) {
        if (!x.is_number_integer() || x.get<int>() < 0) {
          r.fail("bands.half_width", "entries must be non-negative integers");
          break;
        }
        c.bands.half_width.push_back(x.get<int>());
      }
    }
  }
  if (c.bands.half_width.empty()) c.bands.half_width.assign(n, 3);

  const json* gf = r.field(doc, "gelfand");
  const json& go = gf ? *gf : empty;
  r.unknown_keys(go, "gelfand", {"cells", "samples"});
  c.gelfand.cells = r.integer(go, "gelfand", "cells", c.gelfand.cells, 1, 16);
  c.gelfand.samples = r.integer(go, "gelfand", "samples", c.gelfand.samples, 1, 100000);

  c.cluster_max = r.integer(doc, "", "cluster_max", c.cluster_max, 0, 1000);
  c.split_epsilon = r.number(doc, "", "split_epsilon", c.split_epsilon);
  if (c.split_epsilon < 0.0) r.fail("split_epsilon", "must be >= 0 (0 selects 1/(4 C0))");
  c.candidates = r.integer(doc, "", "candidates", c.candidates, 1, 100000);
  c.descent_steps = r.integer(doc, "", "descent_steps", c.descent_steps, 0, 100000);
  c.factor = r.number(doc, "", "factor", c.factor);
  if (!(c.factor > 1.0)) r.fail("factor", "must be > 1");

  const json* out = r.field(doc, "output");
  const json& oo = out ? *out : empty;
  r.unknown_keys(oo, "output", {"dir", "format"});
  c.out_dir = r.string(oo, "output", "dir", c.out_dir);
  c.format = r.string(oo, "output", "format", c.format);
  if (c.format != "csv" && c.format != "json") r.fail("output.format", "expected 'csv' or 'json'");

  if (!r.errors.empty()) throw ConfigError(r.errors);
  return c;
}

std::string apply_override(const std::string& json_text, const std::string& path, const std::string& value) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("document: ") + e.what()});
  }
  if (path.empty()) throw ConfigError({"override: empty field name"});
  json v;
  try {
    v = json::parse(value);
  } catch (const json::parse_error&) {
    v = value;
  }
  std::string pointer;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) pointer += "/" + part;
  try {
    doc[json::json_pointer(pointer)] = v;
  } catch (const json::exception& e) {
    throw ConfigError({path + ": cannot override (" + e.what() + ")"});
  }
  return doc.dump();
}

namespace {

json to_json(const ExperimentConfig& c, bool with_runtime) {
  json j;
  j["dimension"] = c.dimension;
  j["grid"] = c.grid;
  j["J"] = c.J;
  j["K"] = c.K;
  j["K_max"] = c.K_max;
  if (c.metric.kind == MetricConfig::Kind::flat) {
    j["metric"] = {{"kind", "flat"}};
  } else {
    json cf = polynomial_json(c.metric.conformal.poly);
    cf["form"] = c.metric.conformal.kind == ScalarField::Kind::exp_trig ? "exp" : "trig";
    json g0 = json::array();
    for (const auto& row : c.metric.g0) {
      json r = json::array();
      for (const auto& p : row) r.push_back(polynomial_json(p));
      g0.push_back(r);
    }
    j["metric"] = {{"kind", "transversal"}, {"conformal", cf}, {"g0", g0}};
  }
  const Potential& q = c.potential.potential;
  switch (q.kind) {
    case Potential::Kind::zero: j["potential"] = {{"kind", "zero"}}; break;
    case Potential::Kind::trig: {
      json p = polynomial_json(q.trig);
      p["kind"] = "trig";
      j["potential"] = p;
      break;
    }
    case Potential::Kind::singular:
      j["potential"] = {{"kind", "singular"},
                        {"amplitude", q.singular.amplitude},
                        {"alpha", q.singular.alpha},
                        {"center", q.singular.center}};
      break;
    case Potential::Kind::samples: j["potential"] = {{"kind", "samples"}, {"file", c.potential.file}}; break;
  }
  j["tau"] = c.tau;
  j["theta_path"] = c.theta_path;
  j["seed"] = c.seed;
  j["tolerances"] = {{"zero", c.tolerances.zero},
                     {"quasiperiodicity", c.tolerances.quasiperiodicity},
                     {"unitarity", c.tolerances.unitarity},
                     {"direct_integral", c.tolerances.direct_integral},
                     {"conformal", c.tolerances.conformal}};
  j["lp"] = {{"restarts", c.lp.restarts}, {"iterations", c.lp.iterations}};
  j["series"] = {{"m_max", c.series.m_max}, {"m_exact", c.series.m_exact}};
  j["bands"] = {{"count", c.bands.count}, {"half_width", c.bands.half_width}};
  j["gelfand"] = {{"cells", c.gelfand.cells}, {"samples", c.gelfand.samples}};
  j["cluster_max"] = c.cluster_max;
  j["split_epsilon"] = c.split_epsilon;
  j["candidates"] = c.candidates;
  j["descent_steps"] = c.descent_steps;
  j["factor"] = c.factor;
  if (with_runtime) {
    j["threads"] = c.threads;
    j["output"] = {{"dir", c.out_dir}, {"format", c.format}};
  }
  return j;
}

}  // namespace

std::string normalized_json(const ExperimentConfig& c) { return to_json(c, true).dump(2); }

std::string config_hash(const ExperimentConfig& c) {
  // threads and output location do not change any artifact
  const std::string s = to_json(c, false).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<double> sample_potential(const ExperimentConfig& c) {
  const TorusGrid grid(c.dimension, c.grid);
  const Potential& q = c.potential.potential;
  if (q.kind != Potential::Kind::samples) return q.sample(grid);
  std::ifstream in(c.potential.file);
  if (!in) throw ConfigError({"potential.file: cannot open '" + c.potential.file + "'"});
  std::vector<double> v;
  double x;
  while (in >> x) v.push_back(x);
  if (!in.eof()) throw ConfigError({"potential.file: non-numeric entry after " + std::to_string(v.size()) + " values"});
  if (v.size() != grid.size())
    throw ConfigError({"potential.file: expected " + std::to_string(grid.size()) + " samples for grid " +
                       std::to_string(c.grid) + "^" + std::to_string(c.dimension) + ", found " +
                       std::to_string(v.size())});
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i])) throw ConfigError({"potential.file: non-finite sample at node " + std::to_string(i)});
  return v;
}

}  // namespace bloch

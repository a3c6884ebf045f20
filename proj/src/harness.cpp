#include "nanoplate/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "nanoplate/error.hpp"
#include "nanoplate/field.hpp"

namespace nanoplate {

namespace fs = std::filesystem;

namespace {

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("stage ") + name + ": " + e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("stage ") + name + ": " + e.what());
  }
}

Vec2 vec2(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) fail(ErrorKind::InvalidInput, std::string(what) + ": expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j[key].is_null()) return fallback;
  return j[key].get<T>();
}

MaterialSpec parse_material(const json& j, const MaterialSpec& defaults, double r0) {
  MaterialSpec m = defaults;
  m.moduli.mu = get_or(j, "mu", m.moduli.mu);
  m.moduli.lambda = get_or(j, "lambda", m.moduli.lambda);
  m.scales.t = get_or(j, "t", m.scales.t);
  m.scales.l0 = get_or(j, "l0", m.scales.l0);
  m.scales.l1 = get_or(j, "l1", m.scales.l1);
  m.scales.l2 = get_or(j, "l2", m.scales.l2);
  m.scales.r0 = r0;
  if (j.contains("q8") || j.contains("q9")) {
    if (!j.contains("q8") || !j.contains("q9")) fail(ErrorKind::InvalidInput, "materials: q8 and q9 go together");
    m.q_split = QSplit{j["q8"].get<double>(), j["q9"].get<double>()};
  }
  return m;
}

json material_json(const MaterialSpec& m) {
  json j = {{"mu", m.moduli.mu}, {"lambda", m.moduli.lambda}, {"t", m.scales.t},
            {"l0", m.scales.l0}, {"l1", m.scales.l1},          {"l2", m.scales.l2}};
  if (m.q_split) {
    j["q8"] = m.q_split->q8;
    j["q9"] = m.q_split->q9;
  }
  return j;
}

Primitive parse_primitive(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "disk") return Disk{vec2(j.at("center"), "disk center"), j.at("radius").get<double>()};
  if (type == "rect") return AxisRect{vec2(j.at("center"), "rect center"), vec2(j.at("half"), "rect half")};
  if (type == "polygon") {
    Polygon p;
    for (const auto& v : j.at("vertices")) p.vertices.push_back(vec2(v, "polygon vertex"));
    return p;
  }
  fail(ErrorKind::InvalidInput, "unknown inclusion type '" + type + "'");
}

SolveMethod parse_method(const std::string& s) {
  if (s == "direct") return SolveMethod::Direct;
  if (s == "projected_cg") return SolveMethod::ProjectedCG;
  fail(ErrorKind::InvalidInput, "unknown solver method '" + s + "'");
}

std::vector<Vec2> random_probes(const RectDomain& d, int count, double margin, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double a = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double b = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    out.emplace_back(d.origin.x() + margin * d.width + a * (1.0 - 2.0 * margin) * d.width,
                     d.origin.y() + margin * d.height + b * (1.0 - 2.0 * margin) * d.height);
  }
  return out;
}

UcpConfig parse_ucp(const json& j, const RectDomain& domain, std::uint64_t seed, double default_cell) {
  UcpConfig c;
  if (j.contains("probes") && !j["probes"].is_null()) {
    for (const auto& p : j["probes"]) c.probes.push_back(vec2(p, "probe"));
  }
  if (j.contains("random_probes") && !j["random_probes"].is_null()) {
    const auto& r = j["random_probes"];
    auto extra = random_probes(domain, r.at("count").get<int>(), get_or(r, "margin", 0.25), seed);
    c.probes.insert(c.probes.end(), extra.begin(), extra.end());
  }
  if (c.probes.empty()) c.probes.push_back(domain.origin + Vec2(domain.width / 2, domain.height / 2));
  c.outer_fraction = get_or(j, "outer_fraction", c.outer_fraction);
  c.radius_levels = get_or(j, "radius_levels", c.radius_levels);
  if (j.contains("lps_s")) c.lps_s = j["lps_s"].get<std::vector<double>>();
  c.lps_grid = get_or(j, "lps_grid", c.lps_grid);
  c.chi = get_or(j, "chi", c.chi);
  if (j.contains("ap_p")) c.ap_p = j["ap_p"].get<std::vector<double>>();
  c.floor_factor = get_or(j, "floor_factor", c.floor_factor);
  c.hessian_cap = get_or(j, "hessian_cap", c.hessian_cap);
  c.value_cap = get_or(j, "value_cap", c.value_cap);
  c.enforce_ordering = get_or(j, "enforce_ordering", c.enforce_ordering);
  c.caccioppoli_max_h = get_or(j, "caccioppoli_max_h", c.caccioppoli_max_h);
  c.integration_cells = get_or(j, "integration_cells", c.integration_cells);
  c.integration_points = get_or(j, "integration_points", c.integration_points);
  c.quadrature.cell_size = get_or(j, "ball_cell_size", default_cell);
  c.quadrature.exact_degree = get_or(j, "ball_exact_degree", c.quadrature.exact_degree);
  c.quadrature.extra_points = get_or(j, "ball_extra_points", c.quadrature.extra_points);
  return c;
}

json diagnostics_json(const SolveDiagnostics& d) {
  return {{"method", d.method},
          {"residual", d.residual},
          {"constraint_residual", d.constraint_residual},
          {"iterations", d.iterations},
          {"multipliers", {d.multipliers(0), d.multipliers(1), d.multipliers(2)}}};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json jump_json(const JumpClassification& j) {
  return {{"kind", to_string(j.kind)},
          {"eta", optional_json(j.eta)},
          {"eta_bar", optional_json(j.eta_bar)},
          {"delta", optional_json(j.delta)},
          {"delta_bar", optional_json(j.delta_bar)},
          {"eta_star", optional_json(j.eta_star)},
          {"delta_star", optional_json(j.delta_star)},
          {"delta_lower", optional_json(j.delta_lower)},
          {"xi0_star", j.xi0_star()},
          {"xi1_star", j.xi1_star()}};
}

json works_json(const WorkReport& r) {
  json curve = json::array();
  for (const auto& [p, rho] : r.general_curve) curve.push_back({{"p", p}, {"rho", rho}});
  return {{"W", r.W},
          {"W0", r.W0},
          {"gap", r.gap},
          {"residual_u", r.residual_u},
          {"residual_u0", r.residual_u0},
          {"regime", r.regime},
          {"inclusion_energy", r.inclusion_energy},
          {"bracket_low", r.bracket_low},
          {"bracket_high", r.bracket_high},
          {"slack", r.slack},
          {"bracket_ok", r.bracket_ok},
          {"rho_lower", r.rho_lower},
          {"rho_lower_w0", r.rho_lower_w0},
          {"rho_upper_fat", r.rho_upper_fat},
          {"rho_upper_general", r.rho_upper_general},
          {"p_used", r.p_used},
          {"general_curve", curve},
          {"F", r.F}};
}

WorkReport works_from_json(const json& j) {
  WorkReport r;
  r.W = j.at("W").get<double>();
  r.W0 = j.at("W0").get<double>();
  r.gap = j.at("gap").get<double>();
  r.rho_lower = j.at("rho_lower").get<double>();
  r.rho_upper_fat = j.at("rho_upper_fat").get<double>();
  r.rho_upper_general = j.at("rho_upper_general").get<double>();
  r.regime = get_or<std::string>(j, "regime", "none");
  return r;
}

json units_solve() {
  return {{"area", "length^2"},
          {"works.W", "force*length"},
          {"works.W0", "force*length"},
          {"works.gap", "force*length"},
          {"works.inclusion_energy", "length^-2 (integral of squared curvature)"},
          {"works.bracket_low", "force*length"},
          {"works.bracket_high", "force*length"},
          {"works.rho_*", "length^2"},
          {"works.residual_*", "1"},
          {"works.F", "1"},
          {"compatibility.force", "force"},
          {"compatibility.moment*", "force*length"},
          {"solver.*.residual", "1"},
          {"timing.seconds", "s"}};
}

json tolerances_solve(const Scenario& s) {
  return {{"compatibility", {{"regime", "relative to data scale"}, {"value", s.solver.compat_tolerance}}},
          {"works.residual", {{"regime", "relative, hard failure"}, {"value", 1e-6}}},
          {"works.sign_law", {{"regime", "relative to W0"}, {"value", 1e-8}}},
          {"works.bracket", {{"regime", "multiplicative slack plus 1e-8 W0"}, {"value", s.estimates.slack}}},
          {"solver.residual", {{"regime", "relative, hard failure"}, {"value", 1e-6}}},
          {"determinism", {{"regime", "relative"}, {"value", 1e-12}}}};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_cell(const json& v) {
  if (v.is_number_float()) return fmt(v.get<double>());
  if (v.is_number()) return v.dump();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_null()) return "";
  if (v.is_string()) {
    auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  return v.dump();
}

const std::vector<std::string> kSummaryColumns = {"schema_id",   "scenario", "area",       "W",
                                                  "W0",          "gap",      "rhoLower",   "rhoUpperFat",
                                                  "rhoUpperGeneral", "F",    "bracketLow", "bracketHigh",
                                                  "bracketOk"};

json summary_row(const json& record) {
  const auto& w = record.at("works");
  return {{"schema_id", kSummarySchema},      {"scenario", record.at("scenario")},
          {"area", record.at("area")},        {"W", w.at("W")},
          {"W0", w.at("W0")},                 {"gap", w.at("gap")},
          {"rhoLower", w.at("rho_lower")},    {"rhoUpperFat", w.at("rho_upper_fat")},
          {"rhoUpperGeneral", w.at("rho_upper_general")}, {"F", w.at("F")},
          {"bracketLow", w.at("bracket_low")}, {"bracketHigh", w.at("bracket_high")},
          {"bracketOk", w.at("bracket_ok")}};
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::InvalidInput, "cannot create output directory '" + dir + "': " + ec.message());
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::InvalidInput, "cannot write '" + path + "'");
  out << j.dump(1) << '\n';
}

json snapshot(const Solution& u, const std::string& label) {
  const auto& sp = u.space();
  const auto& d = sp.domain();
  json coeffs = json::array();
  for (Eigen::Index i = 0; i < u.coefficients().size(); ++i) coeffs.push_back(u.coefficients()(i));
  return {{"schema_id", "nanoplate.solution/1"},
          {"field", label},
          {"basis", "tensor B-spline, open uniform knots, dof = j * (cells_x + degree) + i"},
          {"degree", sp.degree()},
          {"cells_x", sp.cells_x()},
          {"cells_y", sp.cells_y()},
          {"domain", {{"origin", to_json(d.origin)}, {"width", d.width}, {"height", d.height}}},
          {"coefficients", coeffs}};
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Runs f(i) for i in [0, n) on up to `threads` workers; exceptions are rethrown in index order.
void parallel_for(int n, int threads, const std::function<void(int)>& f) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  const int workers = std::max(1, std::min(threads, n));
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  auto body = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  for (int w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Convergence fields.

class CosineField final : public ScalarField {
 public:
  CosineField(Vec2 origin, double k) : origin_(std::move(origin)), k_(k) {}
  [[nodiscard]] Derivatives eval(const Vec2& x, int order) const override {
    const Vec2 y = x - origin_;
    Derivatives d;
    double fx[5], fy[5];
    for (int i = 0; i <= order; ++i) {
      const double kp = std::pow(k_, i);
      fx[i] = kp * std::cos(k_ * y.x() + i * std::numbers::pi / 2);
      fy[i] = kp * std::cos(k_ * y.y() + i * std::numbers::pi / 2);
    }
    for (int a = 0; a <= order; ++a) {
      for (int b = 0; a + b <= order; ++b) d.d[a][b] = fx[a] * fy[b];
    }
    return d;
  }
  [[nodiscard]] int max_order() const override { return 4; }

 private:
  Vec2 origin_;
  double k_;
};

class DifferenceField final : public ScalarField {
 public:
  DifferenceField(const ScalarField& a, const ScalarField& b) : a_(a), b_(b) {}
  [[nodiscard]] Derivatives eval(const Vec2& x, int order) const override {
    Derivatives da = a_.eval(x, order);
    const Derivatives db = b_.eval(x, order);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) da.d[i][j] -= db.d[i][j];
    }
    return da;
  }
  [[nodiscard]] int max_order() const override { return std::min(a_.max_order(), b_.max_order()); }

 private:
  const ScalarField& a_;
  const ScalarField& b_;
};

}  // namespace

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    fail(ErrorKind::InvalidInput, "override '" + assignment + "': expected key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::stringstream ss(path);
  std::string key;
  std::vector<std::string> keys;
  while (std::getline(ss, key, '.')) {
    if (key.empty()) fail(ErrorKind::InvalidInput, "override '" + assignment + "': empty path segment");
    keys.push_back(key);
  }
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& k = keys[i];
    const bool last = i + 1 == keys.size();
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(k);
      } catch (const std::exception&) {
        fail(ErrorKind::InvalidInput, "override '" + assignment + "': '" + k + "' is not an array index");
      }
      if (idx >= node->size()) fail(ErrorKind::InvalidInput, "override '" + assignment + "': index out of range");
      node = &(*node)[idx];
    } else {
      if (!node->is_object() && !node->is_null()) {
        fail(ErrorKind::InvalidInput, "override '" + assignment + "': '" + k + "' descends into a scalar");
      }
      node = &(*node)[k];
    }
    if (last) *node = value;
  }
}

Scenario parse_scenario(const json& doc, const std::string& base_dir) {
  try {
    if (!doc.is_object()) fail(ErrorKind::InvalidInput, "scenario must be a JSON object");
    if (doc.contains("schema") && doc["schema"] != kScenarioSchema) {
      fail(ErrorKind::InvalidInput, "unsupported scenario schema " + doc["schema"].dump());
    }
    Scenario s;
    s.raw = doc;
    s.base_dir = base_dir;
    s.name = get_or<std::string>(doc, "name", s.name);
    s.seed = get_or<std::uint64_t>(doc, "seed", 0);

    const json dom = doc.value("domain", json::object());
    if (dom.contains("origin")) s.domain.origin = vec2(dom["origin"], "domain origin");
    s.domain.width = get_or(dom, "width", 1.0);
    s.domain.height = get_or(dom, "height", 1.0);
    s.domain.r0 = get_or(dom, "r0", 1.0);
    s.domain.M1 = get_or(dom, "M1", 1.0);
    s.domain.validate();

    const json sp = doc.value("space", json::object());
    s.degree = get_or(sp, "degree", 3);
    s.cells_x = get_or(sp, "cells_x", get_or(sp, "cells", 32));
    s.cells_y = get_or(sp, "cells_y", get_or(sp, "cells", 32));
    require(s.degree >= 3, "space: degree must be at least 3");
    require(s.cells_x >= 1 && s.cells_y >= 1, "space: cell counts must be positive");

    const json mats = doc.value("materials", json::object());
    s.background = parse_material(mats.value("background", json::object()), MaterialSpec{}, s.domain.r0);
    const json inc = mats.value("inclusion", json::object({{"contrast", 1.0}}));
    if (inc.contains("contrast")) {
      if (inc.size() != 1) fail(ErrorKind::InvalidInput, "materials.inclusion: contrast excludes other fields");
      s.contrast = inc["contrast"].get<double>();
      require(*s.contrast > 0.0, "materials.inclusion: contrast must be positive");
    } else {
      s.inclusion = parse_material(inc, s.background, s.domain.r0);
    }

    const json geo = doc.value("geometry", json::object());
    s.d0 = get_or(geo, "d0", 0.0);
    s.h1 = get_or(geo, "h1", 0.05);
    if (geo.contains("inclusions")) {
      for (const auto& p : geo["inclusions"]) s.inclusions.push_back(parse_primitive(p));
    }

    s.loads = doc.value("loads", json::object({{"preset", "self_equilibrated"}}));

    const json so = doc.value("solver", json::object());
    s.solver.subcell_depth = get_or(so, "subcell_depth", s.solver.subcell_depth);
    s.solver.quadrature_points = get_or(so, "quadrature_points", s.solver.quadrature_points);
    s.solver.boundary_points = get_or(so, "boundary_points", s.solver.boundary_points);
    s.solver.method = parse_method(get_or<std::string>(so, "method", "direct"));
    s.solver.cg_tolerance = get_or(so, "cg_tolerance", s.solver.cg_tolerance);
    s.solver.cg_max_iterations = get_or(so, "cg_max_iterations", s.solver.cg_max_iterations);
    s.solver.compat_tolerance = get_or(so, "compat_tolerance", s.solver.compat_tolerance);

    const json est = doc.value("estimates", json::object());
    s.estimates.p = get_or(est, "p", s.estimates.p);
    if (est.contains("p_curve")) s.estimates.p_curve = est["p_curve"].get<std::vector<double>>();
    s.estimates.slack = get_or(est, "slack", s.estimates.slack);
    s.estimates.f_samples = get_or(est, "f_samples", s.estimates.f_samples);
    require(s.estimates.f_samples >= 8, "estimates: f_samples must be at least 8");

    const json diag = doc.value("diagnostics", json::object());
    const double default_cell = std::max(s.domain.width / s.cells_x, s.domain.height / s.cells_y);
    s.ucp = parse_ucp(diag, s.domain, s.seed, default_cell);
    s.synthetic = get_or<std::string>(diag, "synthetic", "");
    if (!s.synthetic.empty() && s.synthetic != "quadratic") {
      fail(ErrorKind::InvalidInput, "diagnostics.synthetic: unknown mode '" + s.synthetic + "'");
    }
    s.sweep = doc.value("sweep", json());
    s.convergence = doc.value("convergence", json());
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("invalid scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides,
                       std::optional<std::uint64_t> seed) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidInput, "cannot open scenario '" + path + "'");
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) fail(ErrorKind::InvalidInput, "scenario '" + path + "' is not valid JSON");
  try {
    for (const auto& o : overrides) apply_override(doc, o);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("override: ") + e.what());
  }
  if (seed) doc["seed"] = *seed;
  auto base = fs::path(path).parent_path().string();
  return parse_scenario(doc, base.empty() ? "." : base);
}

BendingOperators background_operators(const Scenario& s) {
  return build_bending_operators(s.background.moduli, s.background.scales, s.background.q_split);
}

BendingOperators inclusion_operators(const Scenario& s) {
  if (s.contrast) return background_operators(s).scaled(*s.contrast);
  return build_bending_operators(s.inclusion->moduli, s.inclusion->scales, s.inclusion->q_split);
}

InclusionSet inclusion_set(const Scenario& s) { return InclusionSet(s.inclusions, s.d0); }

LoadSpec build_loads(const Scenario& s, const BendingOperators& background) {
  const json& j = s.loads;
  const auto preset = get_or<std::string>(j, "preset", "self_equilibrated");
  LoadSpec load;
  if (preset == "self_equilibrated") {
    load = self_equilibrated_load(s.domain, get_or(j, "mode", 1), get_or(j, "amplitude", 1.0), get_or(j, "moment", 0.0),
                                  get_or(j, "high_order", 0.0));
  } else if (preset == "zero") {
    load = zero_load();
  } else if (preset == "pure_moment") {
    load = pure_moment_load(get_or(j, "moment", 1.0));
  } else if (preset == "high_order_moment") {
    load = high_order_moment_load(get_or(j, "high_order", 1.0));
  } else if (preset == "constant_shear") {
    const double v = get_or(j, "shear", 1.0);
    load = LoadSpec("constant_shear", [v](const BoundaryPoint&, double) { return EdgeLoad{v, 0.0, 0.0}; });
  } else if (preset == "manufactured_cosine") {
    load = manufactured_cosine_load(s.domain, background);
  } else if (preset == "table") {
    auto path = fs::path(j.at("path").get<std::string>());
    if (path.is_relative()) path = fs::path(s.base_dir) / path;
    load = table_load(s.domain, read_load_table(path.string()));
  } else {
    fail(ErrorKind::InvalidInput, "loads: unknown preset '" + preset + "'");
  }
  const double scale = get_or(j, "scale", 1.0);
  return scale == 1.0 ? load : load.scaled(scale);
}

SolveOutcome solve_scenario(const Scenario& s) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveOutcome o;
  const auto bg = stage("materials", [&] { return background_operators(s); });
  const auto inc = stage("materials", [&] { return inclusion_operators(s); });
  o.jump = stage("materials", [&] { return classify_jump(bg, inc); });
  const auto set = stage("geometry", [&] {
    auto set = inclusion_set(s);
    set.validate(s.domain);
    return set;
  });
  const auto loads = stage("loads", [&] { return build_loads(s, bg); });
  o.compatibility = stage("compatibility", [&] {
    return check_compatibility(loads, s.domain, BoundaryRule{}, s.solver.compat_tolerance);
  });
  auto space = stage("space", [&] {
    return std::make_shared<const SplineSpace>(s.domain, s.degree, s.cells_x, s.cells_y);
  });
  SolverOptions opts = s.solver;
  opts.check_compatibility = false;  // gated above with the same rule

  std::optional<PlateProblem> background;
  std::optional<PlateProblem> perturbed;
  stage("solve_u0", [&] {
    background.emplace(space, CoefficientField::homogeneous(bg), loads, opts);
    o.u0 = std::make_shared<Solution>(background->solve());
  });
  stage("solve_u", [&] {
    perturbed.emplace(space, CoefficientField(bg, inc, set), loads, opts);
    o.u = std::make_shared<Solution>(perturbed->solve());
  });
  o.diag_u = o.u->diagnostics();
  o.diag_u0 = o.u0->diagnostics();
  o.normalization_u = perturbed->normalization(o.u->coefficients());
  o.normalization_u0 = background->normalization(o.u0->coefficients());
  o.normalization_scale_u = o.diag_u.constraint_residual;
  o.normalization_scale_u0 = o.diag_u0.constraint_residual;

  o.works = stage("works", [&] { return compute_works(*perturbed, *o.u, *background, *o.u0); });
  stage("energy_lemma", [&] {
    energy_lemma_check(o.works, *perturbed, *o.u0, o.jump, bg.thickness(), s.estimates.slack);
  });
  stage("size_estimators", [&] {
    size_estimators(o.works, s.domain.r0, o.jump, s.estimates.p, s.estimates.p_curve);
  });
  o.f = stage("f_ratio", [&] { return f_ratio(sample_loop(loads, s.domain, s.estimates.f_samples), s.domain.r0); });
  o.works.F = o.f.F;
  if (!set.empty()) {
    o.area = stage("geometry", [&] { return area(set); });
    o.fatness = stage("fatness", [&] { return fatness_check(set, s.h1, s.domain.r0); });
  }
  o.seconds = elapsed(t0);
  return o;
}

json solve_record(const Scenario& s, const SolveOutcome& o) {
  json fat = nullptr;
  if (o.fatness) {
    fat = {{"fat", o.fatness->fat},
           {"margin", o.fatness->margin},
           {"area", o.fatness->area},
           {"eroded_area", o.fatness->eroded_area},
           {"h1", o.fatness->h1}};
  }
  const auto& c = o.compatibility;
  return {{"schema_id", kReportSchema},
          {"kind", "solve"},
          {"scenario", s.name},
          {"seed", s.seed},
          {"area", o.area},
          {"materials",
           {{"background", material_json(s.background)},
            {"inclusion", s.contrast ? json{{"contrast", *s.contrast}} : material_json(*s.inclusion)}}},
          {"jump", jump_json(o.jump)},
          {"compatibility",
           {{"force", c.force},
            {"moment1", c.moment1},
            {"moment2", c.moment2},
            {"force_scale", c.force_scale},
            {"moment_scale", c.moment_scale},
            {"tolerance", c.tolerance},
            {"ok", c.ok()}}},
          {"works", works_json(o.works)},
          {"f_ratio", {{"F", o.f.F}, {"numerator", o.f.numerator}, {"denominator", o.f.denominator}}},
          {"fatness", fat},
          {"solver",
           {{"u", diagnostics_json(o.diag_u)},
            {"u0", diagnostics_json(o.diag_u0)},
            {"normalization_u", {o.normalization_u(0), o.normalization_u(1), o.normalization_u(2)}},
            {"normalization_u0", {o.normalization_u0(0), o.normalization_u0(1), o.normalization_u0(2)}},
            {"dofs", o.u->space().size()}}},
          {"units", units_solve()},
          {"tolerances", tolerances_solve(s)},
          {"scenario_echo", s.raw},
          {"timing", {{"seconds", o.seconds}}}};
}

json run_solve(Scenario s, const RunOptions& opt) {
  s.solver.threads = opt.threads;
  s.ucp.threads = opt.threads;
  const auto outcome = solve_scenario(s);
  json record = solve_record(s, outcome);
  if (!opt.out_dir.empty()) {
    ensure_dir(opt.out_dir);
    write_jsonl(opt.out_dir + "/solve.jsonl", {record});
    write_csv(opt.out_dir + "/solve_summary.csv", kSummaryColumns, {summary_row(record)});
    write_json_file(opt.out_dir + "/solution_u.json", snapshot(*outcome.u, "u"));
    write_json_file(opt.out_dir + "/solution_u0.json", snapshot(*outcome.u0, "u0"));
  }
  return record;
}

json run_sweep(Scenario s, const RunOptions& opt) {
  if (!s.sweep.is_object()) fail(ErrorKind::InvalidInput, "sweep: scenario has no sweep block");
  const auto axis = get_or<std::string>(s.sweep, "axis", "radius");
  const auto values = s.sweep.at("values").get<std::vector<double>>();
  if (values.size() < 3) fail(ErrorKind::InvalidInput, "degenerate sweep: need at least 3 sweep points");
  if (axis != "radius" && axis != "contrast") fail(ErrorKind::InvalidInput, "sweep: unknown axis '" + axis + "'");

  Vec2 center = s.domain.origin + Vec2(s.domain.width / 2, s.domain.height / 2);
  if (axis == "radius") {
    if (s.sweep.contains("center")) {
      center = vec2(s.sweep["center"], "sweep center");
    } else if (!s.inclusions.empty() && std::holds_alternative<Disk>(s.inclusions.front())) {
      center = std::get<Disk>(s.inclusions.front()).center;
    }
  } else if (!s.contrast) {
    fail(ErrorKind::InvalidInput, "sweep: contrast axis needs materials.inclusion given as a contrast");
  }

  const int n = static_cast<int>(values.size());
  const int inner = std::max(1, opt.threads / n);
  std::vector<Scenario> points(static_cast<std::size_t>(n), s);
  std::vector<json> records(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& p = points[static_cast<std::size_t>(i)];
    const double v = values[static_cast<std::size_t>(i)];
    if (axis == "radius") {
      p.inclusions = {Disk{center, v * s.domain.width}};
      p.raw["geometry"]["inclusions"] = json::array(
          {{{"type", "disk"}, {"center", to_json(center)}, {"radius", v * s.domain.width}}});
    } else {
      p.contrast = v;
      p.raw["materials"]["inclusion"] = {{"contrast", v}};
    }
    p.raw.erase("sweep");
    p.name = s.name + "/" + axis + "=" + fmt(v);
    p.solver.threads = inner;
  }
  parallel_for(n, opt.threads, [&](int i) {
    const auto& p = points[static_cast<std::size_t>(i)];
    auto rec = solve_record(p, solve_scenario(p));
    rec["kind"] = "sweep_point";
    rec["sweep"] = {{"axis", axis}, {"value", values[static_cast<std::size_t>(i)]}};
    records[static_cast<std::size_t>(i)] = std::move(rec);
  });

  // Monotonicity along the axis, in ascending order of the swept value.
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
  bool monotone = true;
  for (int k = 1; k < n; ++k) {
    const auto& prev = records[static_cast<std::size_t>(order[k - 1])]["works"];
    const auto& cur = records[static_cast<std::size_t>(order[k])]["works"];
    const double tol = 1e-8 * std::abs(cur["W0"].get<double>());
    if (axis == "radius") {
      // nested stiffer inclusions: W decreases as D grows (softer: increases)
      const double d = cur["W"].get<double>() - prev["W"].get<double>();
      const bool softer = cur["regime"] == "softer";
      if (softer ? d < -tol : d > tol) monotone = false;
    } else if (std::abs(cur["gap"].get<double>()) < std::abs(prev["gap"].get<double>()) - tol) {
      monotone = false;
    }
  }
  bool all_fat = true;
  for (const auto& r : records) {
    if (!r["fatness"].is_null() && !r["fatness"]["fat"].get<bool>()) all_fat = false;
  }

  json summary = {{"schema_id", kReportSchema},
                  {"kind", "sweep"},
                  {"scenario", s.name},
                  {"axis", axis},
                  {"values", values},
                  {"monotone", monotone},
                  {"monotone_rule", axis == "radius" ? "W monotone in nested inclusion size (1e-8 W0)"
                                                     : "|gap| nondecreasing in contrast (1e-8 W0)"},
                  {"all_fat", all_fat}};
  if (axis == "radius") {
    summary["calibration"] = calibrate_records(records);
  } else {
    summary["calibration"] = nullptr;
  }
  if (!opt.out_dir.empty()) {
    ensure_dir(opt.out_dir);
    std::vector<json> all = records;
    all.push_back(summary);
    write_jsonl(opt.out_dir + "/sweep.jsonl", all);
    std::vector<json> rows;
    for (const auto& r : records) rows.push_back(summary_row(r));
    write_csv(opt.out_dir + "/sweep_summary.csv", kSummaryColumns, rows);
  }
  json out = summary;
  out["points"] = records;
  return out;
}

json calibrate_records(const std::vector<json>& records) {
  std::vector<CalibrationPoint> pts;
  for (const auto& r : records) {
    if (!r.contains("works") || !r.contains("area")) continue;
    pts.push_back({r["area"].get<double>(), works_from_json(r["works"])});
  }
  const Calibration c = calibrate(pts);
  return {{"schema_id", kReportSchema},
          {"kind", "calibration"},
          {"C_low", c.C_low},
          {"C_up_fat", c.C_up_fat},
          {"C_up_general", c.C_up_general},
          {"slope", c.slope},
          {"intercept", c.intercept},
          {"points", c.points},
          {"units", {{"C_low", "1"}, {"C_up_fat", "1"}, {"C_up_general", "1"}, {"slope", "1"}}},
          {"tolerances", {{"slope", {{"regime", "expected band"}, {"value", {0.8, 1.2}}}}}}};
}

json run_calibrate(Scenario s, const RunOptions& opt, const std::string& table) {
  json result;
  if (table.empty()) {
    RunOptions inner = opt;
    inner.out_dir.clear();
    result = run_sweep(std::move(s), inner).at("calibration");
    if (result.is_null()) fail(ErrorKind::InvalidInput, "calibrate: needs a radius sweep (distinct areas)");
  } else {
    std::ifstream in(table);
    if (!in) fail(ErrorKind::InvalidInput, "cannot open table '" + table + "'");
    std::vector<json> records;
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json r = json::parse(line, nullptr, false);
      if (r.is_discarded()) fail(ErrorKind::InvalidInput, "table '" + table + "': malformed record");
      records.push_back(std::move(r));
    }
    result = calibrate_records(records);
  }
  if (!opt.out_dir.empty()) {
    ensure_dir(opt.out_dir);
    write_jsonl(opt.out_dir + "/calibrate.jsonl", {result});
  }
  return result;
}

json ucp_record(const UcpReport& r) {
  json probes = json::array();
  for (const auto& p : r.probes) {
    json ts = json::array();
    for (const auto& t : p.three_sphere) {
      ts.push_back({{"kind", t.kind == EnergyKind::Hessian ? "hessian" : "value"},
                    {"s", t.s},
                    {"r", t.r},
                    {"outer", t.outer},
                    {"theta", t.theta},
                    {"Hs", t.Hs},
                    {"Hr", t.Hr},
                    {"Hout", t.Hout},
                    {"C_emp", t.C_emp},
                    {"C_inside", t.C_inside},
                    {"consistency", t.consistency}});
    }
    json ap = json::array();
    for (const auto& [pp, v] : p.ap) ap.push_back({{"p", pp}, {"max_left_side", v}});
    json cac = nullptr;
    if (p.caccioppoli) cac = {{"r", p.caccioppoli->r}, {"C", p.caccioppoli->C}};
    json poi = nullptr;
    if (p.poincare) {
      poi = {{"R", p.poincare->R},
             {"r", p.poincare->r},
             {"lhs", p.poincare->lhs},
             {"rhs", p.poincare->rhs},
             {"quotient", p.poincare->quotient}};
    }
    probes.push_back({{"center", to_json(p.center)},
                      {"clearance", p.clearance},
                      {"R", p.R},
                      {"radii", p.radii},
                      {"H", p.H},
                      {"U", p.U},
                      {"doubling", p.doubling},
                      {"K_emp", p.K_emp},
                      {"N", p.N},
                      {"N_bar", p.N_bar},
                      {"monotone", p.monotone},
                      {"three_sphere", ts},
                      {"ap", ap},
                      {"ap_min", p.ap_min},
                      {"caccioppoli", cac},
                      {"poincare", poi},
                      {"error", p.error}});
  }
  json lps = json::array();
  for (const auto& l : r.lps) {
    lps.push_back({{"s", l.s}, {"C_s", l.C_s}, {"argmin", to_json(l.argmin)}, {"admissible", l.admissible},
                   {"total", l.total}});
  }
  json B = json::array();
  for (const auto& [p, v] : r.B_emp) B.push_back({{"p", p}, {"B_emp", v}});
  return {{"schema_id", kReportSchema},
          {"kind", "diagnose"},
          {"probes", probes},
          {"lps", lps},
          {"B_emp", B},
          {"total_hessian_energy", r.total_hessian_energy},
          {"floor", r.floor},
          {"floor_sensitivity", r.floor_sensitivity},
          {"interpolation", optional_json(r.interpolation)},
          {"warnings", r.warnings},
          {"units",
           {{"probes.radii", "length"},
            {"probes.H", "length^-2 (integral of |D2u|^2)"},
            {"probes.U", "length^2 u^2"},
            {"probes.doubling", "1"},
            {"probes.N", "1"},
            {"probes.N_bar", "1"},
            {"probes.three_sphere.C_emp", "1"},
            {"lps.C_s", "1"},
            {"B_emp", "1"},
            {"floor", "length^-4 u^2"}}},
          {"tolerances",
           {{"monotone", {{"regime", "relative"}, {"value", 1e-12}}},
            {"ap_min", {{"regime", "absolute below 1"}, {"value", 1e-10}}},
            {"floor_factor", {{"regime", "relative to mean |D2u|^2"}, {"value", 1e-14}}},
            {"quadrature", {{"regime", "exact for polynomial degree"}, {"value", 6}}}}}};
}

json run_diagnose(Scenario s, const RunOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  s.solver.threads = opt.threads;
  s.ucp.threads = opt.threads;
  std::shared_ptr<ScalarField> field;
  std::string source;
  if (s.synthetic == "quadratic") {
    field = std::make_shared<PolynomialField>(std::vector<PolynomialField::Term>{{2, 0, 1.0}});
    source = "synthetic u = x1^2";
  } else {
    const auto bg = stage("materials", [&] { return background_operators(s); });
    const auto loads = stage("loads", [&] { return build_loads(s, bg); });
    stage("compatibility",
          [&] { return check_compatibility(loads, s.domain, BoundaryRule{}, s.solver.compat_tolerance); });
    auto space = std::make_shared<const SplineSpace>(s.domain, s.degree, s.cells_x, s.cells_y);
    field = stage("solve_u0", [&] {
      PlateProblem p(space, CoefficientField::homogeneous(bg), loads, s.solver);
      return std::make_shared<Solution>(p.solve());
    });
    source = "u0";
  }
  const UcpReport report = stage("diagnostics", [&] { return run_ucp(*field, s.domain, s.ucp); });
  json record = ucp_record(report);
  record["scenario"] = s.name;
  record["seed"] = s.seed;
  record["field"] = source;
  record["scenario_echo"] = s.raw;
  record["timing"] = {{"seconds", elapsed(t0)}};
  if (!opt.out_dir.empty()) {
    ensure_dir(opt.out_dir);
    write_jsonl(opt.out_dir + "/diagnose.jsonl", {record});
  }
  return record;
}

json run_convergence(Scenario s, const RunOptions& opt) {
  const json cfg = s.convergence.is_object() ? s.convergence : json::object();
  const auto kind = get_or<std::string>(cfg, "case", "cosine");
  const auto meshes = cfg.contains("meshes") ? cfg["meshes"].get<std::vector<int>>() : std::vector<int>{8, 16, 32};
  const int degree = get_or(cfg, "degree", s.degree);
  require(meshes.size() >= 2, "convergence: need at least two meshes");
  for (std::size_t i = 1; i < meshes.size(); ++i) {
    require(meshes[i] > meshes[i - 1], "convergence: meshes must be increasing");
  }
  if (s.contrast ? *s.contrast != 1.0 : true) {
    if (!s.inclusions.empty()) fail(ErrorKind::InvalidInput, "convergence: needs constant coefficients");
  }
  const auto bg = stage("materials", [&] { return background_operators(s); });

  std::unique_ptr<ScalarField> exact;
  LoadSpec loads;
  if (kind == "cosine") {
    require(std::abs(s.domain.width - s.domain.height) <= 1e-14 * s.domain.width,
            "convergence: cosine case needs a square domain");
    exact = std::make_unique<CosineField>(s.domain.origin, std::numbers::pi / s.domain.width);
    loads = manufactured_cosine_load(s.domain, bg);
  } else if (kind == "paraboloid") {
    // (P + Ph) I = (c1 + 2 c2) I
    const double kappa = get_or(cfg, "curvature", 1.0);
    const double m = -kappa * bg.apply_P(Sym2{1.0, 0.0, 1.0}).a11;
    const double w = s.domain.width, h = s.domain.height;
    const Vec2 c = s.domain.origin + Vec2(w / 2, h / 2);
    exact = std::make_unique<PolynomialField>(
        std::vector<PolynomialField::Term>{{2, 0, kappa / 2}, {0, 2, kappa / 2}, {0, 0, -kappa * (w * w + h * h) / 24}},
        c);
    loads = pure_moment_load(m);
  } else {
    fail(ErrorKind::InvalidInput, "convergence: unknown case '" + kind + "'");
  }
  stage("compatibility",
        [&] { return check_compatibility(loads, s.domain, BoundaryRule{}, s.solver.compat_tolerance); });

  SolverOptions opts = s.solver;
  opts.threads = opt.threads;
  opts.quadrature_points = get_or(cfg, "quadrature_points", opts.quadrature_points);
  const int error_points = get_or(cfg, "error_points", degree + 3);

  double exact_scale = 0.0;
  for (int k : {0, 2, 3}) {
    exact_scale = std::max(exact_scale, std::sqrt(domain_integral(*exact, s.domain, meshes.front(), error_points, k,
                                                                  [k](const Derivatives& d) {
                                                                    return d.tensor_norm2(k);
                                                                  })));
  }
  const double roundoff = 1e-10 * std::max(1.0, exact_scale);

  json rows = json::array();
  std::vector<std::array<double, 3>> errs;
  for (int n : meshes) {
    const auto space = std::make_shared<const SplineSpace>(s.domain, degree, n, n);
    const Solution u = stage("solve", [&] {
      PlateProblem p(space, CoefficientField::homogeneous(bg), loads, opts);
      return p.solve();
    });
    const DifferenceField e(u, *exact);
    auto norm = [&](int k) {
      return std::sqrt(domain_integral(e, s.domain, n, error_points, k, [k](const Derivatives& d) {
        return d.tensor_norm2(k);
      }));
    };
    std::array<double, 3> err = {norm(0), norm(2), norm(3)};
    errs.push_back(err);
    rows.push_back({{"cells", n},
                    {"dofs", space->size()},
                    {"L2", err[0]},
                    {"H2", err[1]},
                    {"H3", err[2]},
                    {"solver_residual", u.diagnostics().residual}});
  }
  json flags = json::array();
  bool monotone = true;
  const char* names[3] = {"L2", "H2", "H3"};
  for (std::size_t i = 1; i < errs.size(); ++i) {
    const double ratio = std::log(static_cast<double>(meshes[i]) / meshes[i - 1]);
    for (int k = 0; k < 3; ++k) {
      const double prev = errs[i - 1][static_cast<std::size_t>(k)];
      const double cur = errs[i][static_cast<std::size_t>(k)];
      rows[i][std::string("order_") + names[k]] = prev > 0.0 && cur > 0.0 ? std::log(prev / cur) / ratio : 0.0;
      if (cur > prev && prev > roundoff) {
        monotone = false;
        flags.push_back(std::string("non-monotone ") + names[k] + " error at " + std::to_string(meshes[i]) + " cells");
      }
    }
  }
  json record = {{"schema_id", kReportSchema},
                 {"kind", "convergence"},
                 {"scenario", s.name},
                 {"case", kind},
                 {"degree", degree},
                 {"rows", rows},
                 {"monotone", monotone},
                 {"roundoff_floor", roundoff},
                 {"flags", flags},
                 {"units", {{"L2", "length u"}, {"H2", "u/length (seminorm)"}, {"H3", "u/length^2 (seminorm)"}}},
                 {"tolerances", {{"reproduction", {{"regime", "absolute"}, {"value", 1e-9}}},
                                 {"order_H3", {{"regime", "minimum observed"}, {"value", 0.7}}}}}};
  if (!opt.out_dir.empty()) {
    ensure_dir(opt.out_dir);
    write_jsonl(opt.out_dir + "/convergence.jsonl", {record});
    std::vector<json> csv_rows;
    for (const auto& r : rows) {
      json row = r;
      row["schema_id"] = kSummarySchema;
      csv_rows.push_back(row);
    }
    write_csv(opt.out_dir + "/convergence_summary.csv",
              {"schema_id", "cells", "dofs", "L2", "H2", "H3", "order_L2", "order_H2", "order_H3"}, csv_rows);
  }
  return record;
}

void write_jsonl(const std::string& path, const std::vector<json>& records) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::InvalidInput, "cannot write '" + path + "'");
  for (const auto& r : records) out << r.dump() << '\n';
}

void write_csv(const std::string& path, const std::vector<std::string>& columns, const std::vector<json>& rows) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::InvalidInput, "cannot write '" + path + "'");
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      out << (i ? "," : "") << (r.contains(columns[i]) ? csv_cell(r[columns[i]]) : "");
    }
    out << '\n';
  }
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput:
      return 2;
    case ErrorKind::IncompatibleLoads:
      return 3;
    case ErrorKind::SolverFailure:
      return 4;
    case ErrorKind::DiagnosticsFailure:
      return 5;
  }
  return 4;
}

}  // namespace nanoplate

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "mnsim/charge_profile.hpp"
#include "mnsim/dynamics.hpp"

namespace mnsim {

using Json = nlohmann::json;

struct FieldSpec {
  std::string type = "zero";  // zero | plane_wave | file | random
  std::array<int, 3> n{1, 0, 0};
  Vec3 pol = Vec3(0, 1, 0);
  double amp = 0.0;
  std::string path;
  std::uint64_t seed = 1;
  double l2_norm = 0.01;
  double k0 = 1.0;
};

/// Fully resolved run configuration; every default is explicit.
struct RunConfig {
  struct GridSec {
    double L = 16.0;
    int N = 32;
  } grid;
  struct ProfileSec {
    std::string shape = "gaussian";
    double sigma = 1.0;
    double e = 1.0;
    bool normalize = true;
    RadialTable table;
  } profile;
  struct ModelSec {
    std::string tag = "newton";
    double m = 1.0;
    double I = 1.0;
  } model;
  struct InitialSec {
    Vec3 xi = Vec3::Zero();
    Vec3 v = Vec3::Zero();  // momentum p for the abraham model
    Vec3 omega = Vec3::Zero();
    FieldSpec field;
    bool admissible = true;
  } initial;
  struct SolverSec {
    double s = 0.0;
    double eta = 0.9;
    double picard_tol = 1e-10;
    int max_iter = 50;
    int q = 8;
    double t0 = 0.0;
    double t_end = 1.0;
    double max_step = 1.0;
    double min_step = 1e-9;
  } solver;
  struct OracleSec {
    bool enabled = false;
    double dt = 1e-3;
    int order = 4;
  } oracle;
  struct OutputSec {
    std::string directory = "run_output";
    double cadence = 0.0;  // checkpoint spacing; 0 writes only the final state
  } output;

  ModelKind model_kind() const { return parse_model(model.tag); }
};

namespace config_detail {

/// Reads one JSON object, tracking which keys were consumed so that
/// leftovers can be reported as unknown.
class Section {
public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const Json* raw(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void number(const std::string& key, double& out) {
    if (const Json* v = raw(key)) {
      if (!v->is_number()) throw ConfigError(at(key) + ": expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError(at(key) + ": must be finite");
    }
  }
  void integer(const std::string& key, int& out) {
    if (const Json* v = raw(key)) {
      if (!v->is_number_integer()) throw ConfigError(at(key) + ": expected an integer");
      out = v->get<int>();
    }
  }
  void u64(const std::string& key, std::uint64_t& out) {
    if (const Json* v = raw(key)) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
        throw ConfigError(at(key) + ": expected a nonnegative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const Json* v = raw(key)) {
      if (!v->is_boolean()) throw ConfigError(at(key) + ": expected true or false");
      out = v->get<bool>();
    }
  }
  void string(const std::string& key, std::string& out) {
    if (const Json* v = raw(key)) {
      if (!v->is_string()) throw ConfigError(at(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }
  void vec3(const std::string& key, Vec3& out) {
    if (const Json* v = raw(key)) {
      if (!v->is_array() || v->size() != 3) throw ConfigError(at(key) + ": expected an array of 3 numbers");
      for (std::size_t i = 0; i < 3; ++i) {
        if (!(*v)[i].is_number()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]: expected a number");
        out[static_cast<Eigen::Index>(i)] = (*v)[i].get<double>();
      }
    }
  }
  void ivec3(const std::string& key, std::array<int, 3>& out) {
    if (const Json* v = raw(key)) {
      if (!v->is_array() || v->size() != 3) throw ConfigError(at(key) + ": expected an array of 3 integers");
      for (std::size_t i = 0; i < 3; ++i) {
        if (!(*v)[i].is_number_integer())
          throw ConfigError(at(key) + "[" + std::to_string(i) + "]: expected an integer");
        out[i] = (*v)[i].get<int>();
      }
    }
  }
  void doubles(const std::string& key, std::vector<double>& out) {
    if (const Json* v = raw(key)) {
      if (!v->is_array()) throw ConfigError(at(key) + ": expected an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]: expected a number");
        out.push_back((*v)[i].get<double>());
      }
    }
  }
  std::optional<Section> sub(const std::string& key) {
    if (const Json* v = raw(key)) return Section(*v, at(key));
    return std::nullopt;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(at(it.key()) + ": unknown key");
  }

private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

}  // namespace config_detail

/// Cross-field checks that must pass before any computation.
inline void validate_config(const RunConfig& c) {
  if (!(c.grid.L > 0.0)) throw ConfigError("grid.L: must be positive");
  if (c.grid.N < 4 || c.grid.N % 2 != 0) throw ConfigError("grid.N: must be an even integer >= 4");
  if (c.profile.shape == "gaussian") {
    if (!(c.profile.sigma > 0.0)) throw ConfigError("profile.sigma: must be positive");
  } else if (c.profile.shape == "tabulated") {
    if (c.profile.table.kappa.size() < 2) throw ConfigError("profile.table.kappa: needs at least 2 samples");
    if (c.profile.table.g.size() != c.profile.table.kappa.size())
      throw ConfigError("profile.table.g: length must match profile.table.kappa");
  } else {
    throw ConfigError("profile.shape: expected gaussian or tabulated");
  }
  ModelKind model;
  try {
    model = c.model_kind();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("model.tag: ") + e.what());
  }
  if (!(c.model.m > 0.0)) throw ConfigError("model.m: must be positive");
  if (model == ModelKind::rotating && !(c.model.I > 0.0)) throw ConfigError("model.I: must be positive");
  if (model == ModelKind::rotating && c.profile.shape == "tabulated" &&
      (c.profile.table.dg.empty() || c.profile.table.d2g.empty()))
    throw ConfigError("profile.table: rotating model needs dg and d2g columns");
  if (model != ModelKind::rotating && c.initial.omega.squaredNorm() != 0.0)
    throw ConfigError("initial.omega: only the rotating model has an angular velocity");
  const std::string& ft = c.initial.field.type;
  if (ft != "zero" && ft != "plane_wave" && ft != "file" && ft != "random")
    throw ConfigError("initial.field.type: expected zero, plane_wave, file or random");
  if (ft == "file" && c.initial.field.path.empty()) throw ConfigError("initial.field.path: required for type file");
  if (!(c.solver.s < 1.5)) throw ConfigError("solver.s: s must be < 3/2");
  if (!(c.solver.eta > 0.0 && c.solver.eta <= 1.0)) throw ConfigError("solver.eta: must lie in (0, 1]");
  if (!(c.solver.picard_tol > 0.0)) throw ConfigError("solver.picard_tol: must be positive");
  if (c.solver.max_iter < 1) throw ConfigError("solver.max_iter: must be >= 1");
  if (c.solver.q < 2 || c.solver.q % 2 != 0) throw ConfigError("solver.q: must be an even integer >= 2");
  if (!(c.solver.max_step > 0.0)) throw ConfigError("solver.max_step: must be positive");
  if (!(c.solver.min_step > 0.0)) throw ConfigError("solver.min_step: must be positive");
  if (!(c.oracle.dt > 0.0)) throw ConfigError("oracle.dt: must be positive");
  if (c.oracle.order != 2 && c.oracle.order != 4) throw ConfigError("oracle.order: must be 2 or 4");
  if (!(c.output.cadence >= 0.0)) throw ConfigError("output.cadence: must be >= 0");
}

inline RunConfig config_from_json(const Json& root) {
  using config_detail::Section;
  RunConfig c;
  Section top(root, "");
  for (const char* req : {"grid", "profile", "model"})
    if (!top.has(req)) throw ConfigError(std::string(req) + ": required section missing");

  if (auto s = top.sub("grid")) {
    s->number("L", c.grid.L);
    s->integer("N", c.grid.N);
    s->finish();
  }
  if (auto s = top.sub("profile")) {
    s->string("shape", c.profile.shape);
    s->number("sigma", c.profile.sigma);
    s->number("e", c.profile.e);
    s->boolean("normalize", c.profile.normalize);
    if (auto t = s->sub("table")) {
      t->doubles("kappa", c.profile.table.kappa);
      t->doubles("g", c.profile.table.g);
      t->doubles("dg", c.profile.table.dg);
      t->doubles("d2g", c.profile.table.d2g);
      t->number("decay_bound", c.profile.table.decay_bound);
      t->finish();
    }
    s->finish();
  }
  if (auto s = top.sub("model")) {
    s->string("tag", c.model.tag);
    s->number("m", c.model.m);
    s->number("I", c.model.I);
    s->finish();
  }
  if (auto s = top.sub("initial")) {
    s->vec3("xi", c.initial.xi);
    const bool abraham = c.model.tag == "abraham";
    if (s->has("v") && abraham) throw ConfigError(s->at("v") + ": the abraham model takes a momentum p");
    if (s->has("p") && !abraham) throw ConfigError(s->at("p") + ": only the abraham model takes a momentum p");
    s->vec3(abraham ? "p" : "v", c.initial.v);
    s->vec3("omega", c.initial.omega);
    s->boolean("admissible", c.initial.admissible);
    if (auto f = s->sub("field")) {
      FieldSpec& fs = c.initial.field;
      f->string("type", fs.type);
      f->ivec3("n", fs.n);
      f->vec3("pol", fs.pol);
      f->number("amp", fs.amp);
      f->string("path", fs.path);
      f->u64("seed", fs.seed);
      f->number("l2_norm", fs.l2_norm);
      f->number("k0", fs.k0);
      f->finish();
    }
    s->finish();
  }
  if (auto s = top.sub("solver")) {
    s->number("s", c.solver.s);
    s->number("eta", c.solver.eta);
    s->number("picard_tol", c.solver.picard_tol);
    s->integer("max_iter", c.solver.max_iter);
    s->integer("q", c.solver.q);
    s->number("t0", c.solver.t0);
    s->number("t_end", c.solver.t_end);
    s->number("max_step", c.solver.max_step);
    s->number("min_step", c.solver.min_step);
    s->finish();
  }
  if (auto s = top.sub("oracle")) {
    s->boolean("enabled", c.oracle.enabled);
    s->number("dt", c.oracle.dt);
    s->integer("order", c.oracle.order);
    s->finish();
  }
  if (auto s = top.sub("output")) {
    s->string("directory", c.output.directory);
    s->number("cadence", c.output.cadence);
    s->finish();
  }
  top.finish();
  validate_config(c);
  return c;
}

/// Parses and validates a JSON run configuration.
inline RunConfig parse_config(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  return config_from_json(root);
}

/// The resolved configuration with every default written out.
inline Json config_to_json(const RunConfig& c) {
  using config_detail::vec_json;
  Json j;
  j["grid"] = {{"L", c.grid.L}, {"N", c.grid.N}};
  Json prof = {{"shape", c.profile.shape}, {"e", c.profile.e}};
  if (c.profile.shape == "gaussian") {
    prof["sigma"] = c.profile.sigma;
    prof["normalize"] = c.profile.normalize;
  } else {
    Json t = {{"kappa", c.profile.table.kappa}, {"g", c.profile.table.g}, {"decay_bound", c.profile.table.decay_bound}};
    if (!c.profile.table.dg.empty()) t["dg"] = c.profile.table.dg;
    if (!c.profile.table.d2g.empty()) t["d2g"] = c.profile.table.d2g;
    prof["table"] = t;
  }
  j["profile"] = prof;
  j["model"] = {{"tag", c.model.tag}, {"m", c.model.m}, {"I", c.model.I}};
  const FieldSpec& f = c.initial.field;
  Json field = {{"type", f.type}};
  if (f.type == "plane_wave") {
    field["n"] = {f.n[0], f.n[1], f.n[2]};
    field["pol"] = vec_json(f.pol);
    field["amp"] = f.amp;
  } else if (f.type == "file") {
    field["path"] = f.path;
  } else if (f.type == "random") {
    field["seed"] = f.seed;
    field["l2_norm"] = f.l2_norm;
    field["k0"] = f.k0;
  }
  Json init = {{"xi", vec_json(c.initial.xi)}, {"field", field}, {"admissible", c.initial.admissible}};
  init[c.model.tag == "abraham" ? "p" : "v"] = vec_json(c.initial.v);
  if (c.model.tag == "rotating") init["omega"] = vec_json(c.initial.omega);
  j["initial"] = init;
  j["solver"] = {{"s", c.solver.s},         {"eta", c.solver.eta},         {"picard_tol", c.solver.picard_tol},
                 {"max_iter", c.solver.max_iter}, {"q", c.solver.q},       {"t0", c.solver.t0},
                 {"t_end", c.solver.t_end}, {"max_step", c.solver.max_step}, {"min_step", c.solver.min_step}};
  j["oracle"] = {{"enabled", c.oracle.enabled}, {"dt", c.oracle.dt}, {"order", c.oracle.order}};
  j["output"] = {{"directory", c.output.directory}, {"cadence", c.output.cadence}};
  return j;
}

}  // namespace mnsim

#pragma once

// Scenario files (TOML or JSON) and trajectory output (CSV or JSON).
//
// Scenario layout (TOML; the JSON form uses the same keys):
//
//   model_id = "rocard"
//   variant  = ""            # optional, model specific
//   t_end    = 10.0
//   [params]   I = 1.0 ...
//   [initial]  psi_dot = 5.0 ...
//   [options]  dt, method ("rk4" | "implicit-midpoint"),
//              projection ("post-step" | "none"),
//              baumgarte_alpha, baumgarte_beta, cons_tol, solve_tol
//   [[outputs]] format = "csv", path = "out.csv"
//
// Relative output paths are resolved against the scenario's directory.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>
#include <toml.hpp>

#include "hocon/models.hpp"

namespace hocon {

struct OutputSpec {
  std::string format;  // csv | json
  std::string path;
};

struct Scenario {
  std::string model_id;
  std::string variant;
  std::map<std::string, double> params;
  std::map<std::string, double> initial;
  double t_end = 0.0;
  IntegratorOptions options;
  std::vector<OutputSpec> outputs;
  std::filesystem::path base_dir;
};

namespace detail {

inline Method parse_method(const std::string& s) {
  if (s == "rk4" || s == "ExplicitRK4OnSolvedAccel") return Method::ExplicitRK4OnSolvedAccel;
  if (s == "implicit-midpoint" || s == "ImplicitMidpoint") return Method::ImplicitMidpoint;
  throw ConfigurationError("options.method: unknown method '" + s + "'");
}

inline ProjectionMode parse_projection(const std::string& s) {
  if (s == "post-step" || s == "PostStep") return ProjectionMode::PostStep;
  if (s == "none" || s == "None") return ProjectionMode::None;
  throw ConfigurationError("options.projection: unknown mode '" + s + "'");
}

inline const char* method_name(Method m) {
  return m == Method::ImplicitMidpoint ? "implicit-midpoint" : "rk4";
}
inline const char* projection_name(ProjectionMode p) {
  return p == ProjectionMode::PostStep ? "post-step" : "none";
}

inline void validate(const Scenario& s) {
  if (s.model_id.empty()) throw ConfigurationError("missing field 'model_id'");
  const ModelInfo& info = model_info(s.model_id);
  if (!(s.t_end > 0.0)) throw ConfigurationError("t_end must be > 0");
  s.options.validate();
  for (const auto& [k, v] : s.initial) {
    if (std::find(info.state_names.begin(), info.state_names.end(), k) == info.state_names.end())
      throw ConfigurationError("initial: model '" + s.model_id + "' has no state field '" + k + "'");
    if (!std::isfinite(v)) throw ConfigurationError("initial." + k + " is not finite");
  }
  for (const auto& r : info.required)
    if (!s.initial.count(r))
      throw ConfigurationError("initial: missing required field '" + r + "' for model '" +
                               s.model_id + "'");
  for (const auto& o : s.outputs)
    if (o.format != "csv" && o.format != "json")
      throw ConfigurationError("outputs: unknown format '" + o.format + "'");
}

inline void set_option(IntegratorOptions& o, const std::string& k, const std::string* str,
                       const double* num) {
  auto need_num = [&]() -> double {
    if (!num) throw ConfigurationError("options." + k + " must be a number");
    return *num;
  };
  auto need_str = [&]() -> const std::string& {
    if (!str) throw ConfigurationError("options." + k + " must be a string");
    return *str;
  };
  if (k == "dt") o.dt = need_num();
  else if (k == "method") o.method = parse_method(need_str());
  else if (k == "projection") o.projection = parse_projection(need_str());
  else if (k == "baumgarte_alpha") o.baumgarte_alpha = need_num();
  else if (k == "baumgarte_beta") o.baumgarte_beta = need_num();
  else if (k == "cons_tol") o.cons_tol = need_num();
  else if (k == "solve_tol") o.solve_tol = need_num();
  else throw ConfigurationError("options: unknown key '" + k + "'");
}

inline Scenario from_toml(const toml::table& t) {
  Scenario s;
  for (auto&& [key, node] : t) {
    const std::string k(key.str());
    if (k == "model_id" || k == "variant") {
      auto v = node.value<std::string>();
      if (!v) throw ConfigurationError(k + " must be a string");
      (k == "model_id" ? s.model_id : s.variant) = *v;
    } else if (k == "t_end") {
      auto v = node.value<double>();
      if (!v) throw ConfigurationError("t_end must be a number");
      s.t_end = *v;
    } else if (k == "params" || k == "initial") {
      const auto* tab = node.as_table();
      if (!tab) throw ConfigurationError(k + " must be a table");
      for (auto&& [pk, pv] : *tab) {
        auto v = pv.value<double>();
        if (!v) throw ConfigurationError(k + "." + std::string(pk.str()) + " must be a number");
        (k == "params" ? s.params : s.initial)[std::string(pk.str())] = *v;
      }
    } else if (k == "options") {
      const auto* tab = node.as_table();
      if (!tab) throw ConfigurationError("options must be a table");
      for (auto&& [ok, ov] : *tab) {
        auto str = ov.value<std::string>();
        auto num = ov.is_number() ? ov.value<double>() : std::optional<double>{};
        set_option(s.options, std::string(ok.str()), str ? &*str : nullptr, num ? &*num : nullptr);
      }
    } else if (k == "outputs") {
      const auto* arr = node.as_array();
      if (!arr) throw ConfigurationError("outputs must be an array of tables");
      for (auto&& item : *arr) {
        const auto* ot = item.as_table();
        if (!ot) throw ConfigurationError("outputs entries must be tables");
        OutputSpec o;
        o.format = (*ot)["format"].value_or(std::string("csv"));
        auto p = (*ot)["path"].value<std::string>();
        if (!p) throw ConfigurationError("outputs entry without 'path'");
        o.path = *p;
        s.outputs.push_back(o);
      }
    } else {
      throw ConfigurationError("unknown top-level key '" + k + "'");
    }
  }
  return s;
}

inline Scenario from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigurationError("scenario must be a JSON object");
  Scenario s;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const auto& v = it.value();
    if (k == "model_id" || k == "variant") {
      if (!v.is_string()) throw ConfigurationError(k + " must be a string");
      (k == "model_id" ? s.model_id : s.variant) = v.get<std::string>();
    } else if (k == "t_end") {
      if (!v.is_number()) throw ConfigurationError("t_end must be a number");
      s.t_end = v.get<double>();
    } else if (k == "params" || k == "initial") {
      if (!v.is_object()) throw ConfigurationError(k + " must be an object");
      for (auto p = v.begin(); p != v.end(); ++p) {
        if (!p.value().is_number()) throw ConfigurationError(k + "." + p.key() + " must be a number");
        (k == "params" ? s.params : s.initial)[p.key()] = p.value().get<double>();
      }
    } else if (k == "options") {
      if (!v.is_object()) throw ConfigurationError("options must be an object");
      for (auto p = v.begin(); p != v.end(); ++p) {
        std::string str;
        double num = 0.0;
        const bool is_str = p.value().is_string(), is_num = p.value().is_number();
        if (is_str) str = p.value().get<std::string>();
        if (is_num) num = p.value().get<double>();
        set_option(s.options, p.key(), is_str ? &str : nullptr, is_num ? &num : nullptr);
      }
    } else if (k == "outputs") {
      if (!v.is_array()) throw ConfigurationError("outputs must be an array");
      for (const auto& o : v) {
        if (!o.is_object() || !o.contains("path")) throw ConfigurationError("outputs entry without 'path'");
        s.outputs.push_back({o.value("format", std::string("csv")), o["path"].get<std::string>()});
      }
    } else {
      throw ConfigurationError("unknown top-level key '" + k + "'");
    }
  }
  return s;
}

}  // namespace detail

inline Scenario parse_scenario_toml(const std::string& text) {
  toml::table t;
  try {
    t = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw ConfigurationError(std::string("TOML parse error: ") + std::string(e.description()));
  }
  Scenario s = detail::from_toml(t);
  detail::validate(s);
  return s;
}

inline Scenario parse_scenario_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("JSON parse error: ") + e.what());
  }
  Scenario s = detail::from_json(j);
  detail::validate(s);
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open scenario file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  Scenario s = path.extension() == ".json" ? parse_scenario_json(buf.str())
                                           : parse_scenario_toml(buf.str());
  s.base_dir = path.parent_path();
  return s;
}

// ---------------------------------------------------------------------------
// Building and running
// ---------------------------------------------------------------------------

/// Initial state from the scenario: positions default to 0, velocities not
/// given are completed from the constraints (given ones are kept).
inline State initial_state(const AnySystem& sys, const Scenario& sc) {
  const ModelInfo& info = model_info(sc.model_id);
  const int np = info.npos;
  const int nv = static_cast<int>(info.state_names.size()) - np;
  State s{Vec::Zero(np), Vec::Zero(nv)};
  std::vector<bool> given(static_cast<size_t>(nv), false);
  for (int i = 0; i < np + nv; ++i) {
    auto it = sc.initial.find(info.state_names[static_cast<size_t>(i)]);
    if (it == sc.initial.end()) continue;
    if (i < np) {
      s.q(i) = it->second;
    } else {
      s.qd(i - np) = it->second;
      given[static_cast<size_t>(i - np)] = true;
    }
  }
  // Velocities neither given nor derived default to zero and are held.
  for (int i = 0; i < nv; ++i) {
    const auto& name = info.state_names[static_cast<size_t>(np + i)];
    if (std::find(info.derived.begin(), info.derived.end(), name) == info.derived.end())
      given[static_cast<size_t>(i)] = true;
  }
  return std::visit(
      [&](const auto& system) {
        try {
          return complete_state(system, s, given, sc.options);
        } catch (const ProjectionError&) {
          return s;  // check_initial reports the offending rows
        }
      },
      sys);
}

struct RunResult {
  Trajectory trajectory;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Column layout: t, positions, velocities, lambda_i, E, max_abs_RK, power.
/// Reduced balls also report the reconstructed contact point (a1, a2) as
/// positions.
inline RunResult tabulate(const AnySystem& sys, const Scenario& sc, Trajectory tr) {
  const ModelInfo& info = model_info(sc.model_id);
  RunResult out;
  out.columns.push_back("t");
  std::vector<std::vector<double>> extra;  // reconstructed translations per step
  if (const auto* red = std::get_if<ReducedSystem>(&sys)) {
    bool has_rn = false;
    for (const auto& f : red->group().factors()) has_rn |= f.kind == GroupFactor::Rn;
    if (has_rn && red->shape_dim() == 0) {
      std::vector<Vec> vs;
      for (const auto& st : tr.states) vs.push_back(st.qd);
      const double dt = tr.size() > 1 ? tr.times[1] - tr.times[0] : sc.options.dt;
      auto g = reconstruct(red->group(), identity_element(red->group()), vs, dt);
      for (const auto& e : g) {
        std::vector<double> row;
        for (const auto& tv : e.translations)
          for (Eigen::Index i = 0; i < tv.size(); ++i) row.push_back(tv(i));
        extra.push_back(row);
      }
      out.columns.push_back("a1");
      out.columns.push_back("a2");
    }
  }
  for (const auto& n : info.state_names) out.columns.push_back(n);
  const size_t m = tr.lambdas.empty() ? 0 : static_cast<size_t>(tr.lambdas.front().size());
  for (size_t i = 0; i < m; ++i) out.columns.push_back("lambda_" + std::to_string(i + 1));
  out.columns.push_back("E");
  out.columns.push_back("max_abs_RK");
  out.columns.push_back("power");
  for (size_t k = 0; k < tr.size(); ++k) {
    std::vector<double> row{tr.times[k]};
    if (!extra.empty()) row.insert(row.end(), extra[k].begin(), extra[k].end());
    for (Eigen::Index i = 0; i < tr.states[k].q.size(); ++i) row.push_back(tr.states[k].q(i));
    for (Eigen::Index i = 0; i < tr.states[k].qd.size(); ++i) row.push_back(tr.states[k].qd(i));
    for (size_t i = 0; i < m; ++i) row.push_back(tr.lambdas[k](static_cast<Eigen::Index>(i)));
    row.push_back(tr.energy[k]);
    row.push_back(tr.kin_residual[k]);
    row.push_back(tr.power[k]);
    out.rows.push_back(std::move(row));
  }
  out.trajectory = std::move(tr);
  return out;
}

inline std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(std::ostream& os, const RunResult& r) {
  for (size_t i = 0; i < r.columns.size(); ++i) os << (i ? "," : "") << r.columns[i];
  os << "\n";
  for (const auto& row : r.rows) {
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format17(row[i]);
    os << "\n";
  }
}

inline nlohmann::json meta_json(const Scenario& sc) {
  nlohmann::json meta;
  meta["model_id"] = sc.model_id;
  if (!sc.variant.empty()) meta["variant"] = sc.variant;
  std::map<std::string, double> params = model_info(sc.model_id).defaults;
  for (const auto& [k, v] : sc.params) params[k] = v;
  meta["params"] = params;
  meta["options"] = {{"dt", sc.options.dt},
                     {"method", detail::method_name(sc.options.method)},
                     {"projection", detail::projection_name(sc.options.projection)},
                     {"baumgarte_alpha", sc.options.baumgarte_alpha},
                     {"baumgarte_beta", sc.options.baumgarte_beta},
                     {"cons_tol", sc.options.cons_tol},
                     {"solve_tol", sc.options.solve_tol}};
  return meta;
}

/// {"meta": {...}, "columns": [...], "rows": [[...], ...]}; numbers in rows
/// carry 17 significant digits.
inline void write_json(std::ostream& os, const Scenario& sc, const RunResult& r) {
  auto num = [](double v) { return std::isfinite(v) ? format17(v) : std::string("null"); };
  os << "{\"meta\":" << meta_json(sc).dump() << ",\"columns\":" << nlohmann::json(r.columns).dump()
     << ",\"rows\":[";
  for (size_t k = 0; k < r.rows.size(); ++k) {
    os << (k ? ",\n[" : "\n[");
    for (size_t i = 0; i < r.rows[k].size(); ++i) os << (i ? "," : "") << num(r.rows[k][i]);
    os << "]";
  }
  os << "]}\n";
}

inline void write_output(const OutputSpec& o, const Scenario& sc, const RunResult& r) {
  std::filesystem::path p(o.path);
  if (p.is_relative() && !sc.base_dir.empty()) p = sc.base_dir / p;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw ConfigurationError("cannot write output '" + p.string() + "'");
  if (o.format == "json")
    write_json(out, sc, r);
  else
    write_csv(out, r);
}

}  // namespace hocon

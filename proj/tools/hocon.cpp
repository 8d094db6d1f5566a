// hocon: run scenarios, run verification suites, list built-in models.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hocon/hocon.hpp"

namespace {

enum Exit { kOk = 0, kFail = 1, kConfig = 2, kInitial = 3, kIntegration = 4 };

int list_models() {
  for (const auto& m : hocon::model_registry()) {
    std::cout << m.id << "\n  " << m.summary << "\n  params:";
    for (const auto& [k, v] : m.defaults) std::cout << " " << k << "=" << v;
    std::cout << "\n  state:";
    for (size_t i = 0; i < m.state_names.size(); ++i)
      std::cout << (static_cast<int>(i) == m.npos ? " |" : "") << " " << m.state_names[i];
    std::cout << "\n  required initial:";
    for (const auto& r : m.required) std::cout << " " << r;
    std::cout << "\n  completed from constraints:";
    for (const auto& r : m.derived) std::cout << " " << r;
    if (!m.variants.empty()) {
      std::cout << "\n  variants:";
      for (const auto& v : m.variants) std::cout << " " << v;
    }
    std::cout << "\n";
  }
  return kOk;
}

struct RunArgs {
  std::string scenario;
  std::optional<double> dt, t_end;
  std::string out;
};

int run(const RunArgs& a) {
  hocon::Scenario sc;
  std::optional<hocon::AnySystem> sys;
  try {
    sc = hocon::load_scenario(a.scenario);
    if (a.dt) sc.options.dt = *a.dt;
    if (a.t_end) sc.t_end = *a.t_end;
    if (!a.out.empty()) {
      // --out names a directory; every output keeps its file name there.
      for (auto& o : sc.outputs) o.path = (std::filesystem::path(a.out) / std::filesystem::path(o.path).filename()).string();
      if (sc.outputs.empty())
        sc.outputs.push_back({"csv", (std::filesystem::path(a.out) / (sc.model_id + ".csv")).string()});
    }
    hocon::detail::validate(sc);
    sys = hocon::build_model(sc.model_id, sc.params, sc.variant);
  } catch (const hocon::ConfigurationError& e) {
    std::cerr << "hocon: " << e.what() << "\n";
    return kConfig;
  } catch (const hocon::UsageError& e) {
    std::cerr << "hocon: " << e.what() << "\n";
    return kConfig;
  }

  hocon::State s0;
  try {
    s0 = hocon::initial_state(*sys, sc);
    auto check = std::visit([&](const auto& m) { return hocon::check_initial(m, s0, sc.options); }, *sys);
    if (!check.ok()) {
      std::cerr << "hocon: inconsistent initial state: " << check.message() << "\n";
      return kInitial;
    }
  } catch (const hocon::Error& e) {
    std::cerr << "hocon: inconsistent initial state: " << e.what() << "\n";
    return kInitial;
  }

  hocon::RunResult res;
  try {
    auto tr = std::visit([&](const auto& m) { return hocon::integrate(m, s0, 0.0, sc.t_end, sc.options); }, *sys);
    res = hocon::tabulate(*sys, sc, std::move(tr));
  } catch (const hocon::Error& e) {
    std::cerr << "hocon: integration failed: " << e.what() << "\n";
    return kIntegration;
  }

  const auto& tr = res.trajectory;
  const double drift = tr.energy.back() - tr.energy.front();
  // Dissipated energy: minus the integral of the constraint power (trapezoid).
  double dissipated = 0.0;
  for (size_t k = 0; k + 1 < tr.size(); ++k)
    dissipated -= 0.5 * (tr.power[k] + tr.power[k + 1]) * (tr.times[k + 1] - tr.times[k]);
  std::printf("model       %s\n", sc.model_id.c_str());
  std::printf("steps       %zu\n", tr.size() - 1);
  std::printf("t_end       %.17g\n", tr.times.back());
  std::printf("residual    %.3e (final max |R_K|)\n", tr.kin_residual.back());
  std::printf("energy      E0 = %.17g, drift = %.3e\n", tr.energy.front(), drift);
  std::printf("dissipated  %.3e (integral of -lambda . R_V q')\n", dissipated);

  try {
    for (const auto& o : sc.outputs) {
      hocon::write_output(o, sc, res);
      std::printf("wrote       %s (%s)\n", o.path.c_str(), o.format.c_str());
    }
  } catch (const hocon::Error& e) {
    std::cerr << "hocon: " << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}

int verify(const std::string& suite, bool strict) {
  const auto& ids = hocon::verify::suite_ids();
  if (std::find(ids.begin(), ids.end(), suite) == ids.end()) {
    std::cerr << "hocon: unknown suite '" << suite << "'; available:";
    for (const auto& i : ids) std::cerr << " " << i;
    std::cerr << "\n";
    return kConfig;
  }
  const auto t0 = std::chrono::steady_clock::now();
  hocon::verify::SuiteReport r;
  try {
    r = hocon::verify::run_suite(suite, strict);
  } catch (const hocon::Error& e) {
    std::cerr << "hocon: suite aborted: " << e.what() << "\n";
    return kFail;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& c : r.checks) std::cout << hocon::verify::format(c) << "\n";
  std::printf("%s %s (%s, %.1f s)\n", r.pass() ? "PASS" : "FAIL", suite.c_str(), strict ? "strict" : "quick", secs);
  return r.pass() ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hocon: higher-order nonholonomic constraint simulator"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "integrate a scenario file (TOML or JSON)");
  run_cmd->add_option("scenario", ra.scenario, "scenario file")->required();
  run_cmd->add_option("--dt", ra.dt, "override options.dt");
  run_cmd->add_option("--t-end", ra.t_end, "override t_end");
  run_cmd->add_option("--out", ra.out, "directory for the scenario's outputs");

  std::string suite;
  bool strict = false;
  auto* verify_cmd = app.add_subcommand("verify", "run a verification suite");
  verify_cmd->add_option("suite", suite, "suite id")->required();
  verify_cmd->add_flag("--strict", strict, "full horizons and sample counts");

  auto* list_cmd = app.add_subcommand("list-models", "list built-in models");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }
  if (*run_cmd) return run(ra);
  if (*verify_cmd) return verify(suite, strict);
  if (*list_cmd) return list_models();
  return kConfig;
}

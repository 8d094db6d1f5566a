// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// All tolerances live in hocon/verify.hpp next to the measurements.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "hocon/verify.hpp"

using namespace hocon;
using namespace hocon::verify;

namespace {

struct Criterion {
  int id;
  std::string title;
  std::function<std::vector<Check>(const Budget&)> run;
};

std::vector<Check> concat(std::vector<Check> a, const std::vector<Check>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

int main() {
  const Budget b = Budget::full();
  const std::vector<Criterion> criteria = {
      {1, "elastic-ball constants",
       [](const Budget& b) {
         return concat(elastic_ball_constants(BallFormulation::Omega3Zero, b),
                       elastic_ball_constants(BallFormulation::CurvatureSecondOrder, b));
       }},
      {2, "formulation equivalence", ball_formulation_equivalence},
      {3, "D'Alembert energy conservation", dalembert_conservation},
      {4, "Rocard dissipation formula", rocard_energy},
      {5, "Rocard dynamic equations", rocard_dynamic_equations},
      {6, "Greidanus to Rocard limit", greidanus_limit},
      {7, "moving-plane oracle", moving_plane_oracle},
      {8, "Chetaev reductions", chetaev_checks},
      {9, "numerics hygiene",
       [](const Budget& b) {
         return concat(concat(gradient_check(b), rk4_convergence(b)), constraint_drift(b));
       }},
      {10, "reduction consistency", reconstruction_checks},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Check> checks;
    std::string error;
    try {
      checks = c.run(b);
    } catch (const std::exception& e) {
      error = e.what();
    }
    bool pass = error.empty() && !checks.empty();
    for (const auto& k : checks) pass = pass && k.pass;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d: %s (%.1f s)\n", pass ? "PASS" : "FAIL", c.id, c.title.c_str(), secs);
    for (const auto& k : checks) std::printf("    %s\n", format(k).c_str());
    if (!error.empty()) std::printf("    error: %s\n", error.c_str());
    std::fflush(stdout);
    failed += pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

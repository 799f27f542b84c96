// One line per acceptance criterion, followed by the underlying checks.

#include "geomimu/gmc1.hpp"
#include "geomimu/placement.hpp"
#include "geomimu/verify/suites.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>

using namespace geomimu;
using verify::Check;

namespace {

struct Criterion {
  const char* name;
  double budget_seconds;  // 0: no runtime bound
  std::function<std::vector<Check>()> run;
};

std::vector<Check> concat(std::vector<Check> a, const std::vector<Check>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Candidate totals of a user-supplied template; informational only.
void report_template(const char* path) {
  try {
    const auto c = load_motion_container(std::filesystem::path(path));
    const auto sel = select_candidate_vertices(c.body);
    std::size_t total = 0;
    for (std::size_t s = 0; s < sel.per_segment.size(); ++s) {
      total += sel.per_segment[s].size();
      std::cout << "      " << c.body.segment_names[s] << ": " << sel.per_segment[s].size() << "\n";
    }
    const int head = segment_index(c.body, "Head");
    std::cout << "INFO  template candidates: total " << total << " (reference 2374)";
    if (head >= 0) std::cout << ", Head " << sel.per_segment[static_cast<std::size_t>(head)].size() << " (reference 290)";
    std::cout << "\n";
  } catch (const std::exception& e) {
    std::cout << "INFO  template report skipped: " << e.what() << "\n";
  }
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"Kinematics suite", 5.0, [] { return verify::kinematics_checks(); }},
      {"Frame suite", 1.0, [] { return verify::frame_checks(1000); }},
      {"Equivariance", 0.0, [] { return verify::equivariance_checks(100); }},
      {"Masking distribution", 0.0, [] { return verify::masking_checks(100000); }},
      {"Loss oracles", 0.0, [] { return verify::loss_checks(50); }},
      {"PQ suite", 30.0, [] { return verify::pq_checks(); }},
      {"Diagnostics semantics", 0.0, [] { return verify::diagnostics_checks(); }},
      {"Format round trips", 0.0, [] { return concat(verify::format_checks(), verify::noise_prior_checks()); }},
      {"Placement rule", 0.0, [] { return verify::placement_rule_checks(200); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    const auto checks = c.run();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool ok = !checks.empty();
    for (const auto& ch : checks) ok = ok && ch.passed;
    const bool in_time = c.budget_seconds == 0.0 || seconds < c.budget_seconds;
    char timing[64];
    if (c.budget_seconds > 0.0)
      std::snprintf(timing, sizeof timing, "%.2f s (budget %.0f s)", seconds, c.budget_seconds);
    else
      std::snprintf(timing, sizeof timing, "%.2f s", seconds);
    std::cout << ((ok && in_time) ? "PASS" : "FAIL") << "  [PRIMARY] " << c.name << "  " << timing << "\n";
    for (const auto& ch : checks) {
      std::ostringstream line;
      verify::print_check(line, ch);
      std::cout << "      " << line.str();
    }
    failed += !(ok && in_time);
  }
  if (const char* path = std::getenv("GEOMIMU_TEMPLATE")) report_template(path);
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " acceptance criteria passed\n";
  return failed == 0 ? 0 : 1;
}

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace geomimu::verify {

struct Check {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct SuiteResult {
  std::string suite;
  std::vector<Check> checks;
  double seconds = 0.0;

  bool passed() const;
};

// Property checks against bundled fixtures and independent oracles. Every
// check reports the measured error next to its tolerance.
std::vector<Check> kinematics_checks();
std::vector<Check> equivariance_checks(std::size_t draws = 100);
std::vector<Check> frame_checks(std::size_t samples = 1000);
std::vector<Check> placement_rule_checks(std::size_t matrices = 200);
std::vector<Check> masking_checks(std::size_t draws = 100000);
std::vector<Check> loss_checks(std::size_t instances = 50);
std::vector<Check> pq_checks();
std::vector<Check> diagnostics_checks();
std::vector<Check> format_checks();
std::vector<Check> noise_prior_checks();

/// kinematics, frames, masking, losses, pq, formats, all.
const std::vector<std::string>& suite_names();

/// Throws ValidationError for an unknown suite.
SuiteResult run_suite(const std::string& name);

void print_check(std::ostream& os, const Check& c);
void print_suite(std::ostream& os, const SuiteResult& r);

}  // namespace geomimu::verify

#pragma once

#include "labeltrick/objectives.hpp"

namespace labeltrick {

struct InstanceRecord {
  std::uint64_t seed = 0;
  Index n = 0;
  Index m = 0;
  double alpha = 0.0;
  double rel_gap = 0.0;
  bool pass = false;
};

/// One verification battery. `records` holds every instance in generation
/// order; `failures` the failing subset. Wall time is console-only and is
/// never serialized, so written reports are byte-identical across reruns
/// with the same master seed.
struct VerificationSuiteReport {
  std::string suite;
  std::uint64_t master_seed = 0;
  Index instances = 0;
  double max_rel_gap = 0.0;
  std::vector<InstanceRecord> records;
  std::vector<InstanceRecord> failures;
  double wall_time_sec = 0.0;

  bool passed() const { return failures.empty(); }
};

/// Randomized exact-identity battery for the regression identity (label
/// term only): relative gap <= 1e-10 per instance.
VerificationSuiteReport verify_theorem1(Index n_instances, std::uint64_t seed);

/// Same identity with the node-feature term added.
VerificationSuiteReport verify_corollary1(Index n_instances,
                                          std::uint64_t seed);

/// Cross-entropy bound: lhs >= rhs - 1e-9 on every instance, and tight to
/// 1e-9 at zero weights.
VerificationSuiteReport verify_theorem2(Index n_instances, std::uint64_t seed);

/// Scaled-loss limit on a fixed toy fixture: the gap to the leave-one-out
/// target decreases along `alphas` and the final gap is <= 2% of the
/// target. Also checks the near-linear special case and the zero-weight
/// degenerate case.
VerificationSuiteReport verify_theorem3(const std::vector<double>& alphas,
                                        std::uint64_t seed);

/// Exact mask-expectation identities (a)-(d) plus the cross term, absolute
/// tolerance 1e-10.
VerificationSuiteReport verify_appendix_identities(Index n_instances,
                                                   std::uint64_t seed);

std::string format_report(const VerificationSuiteReport& report);
void write_report(const VerificationSuiteReport& report,
                  const std::string& path);

}  // namespace labeltrick

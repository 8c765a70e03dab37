#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "encpol/parser.hpp"
#include "encpol/policy.hpp"
#include "encpol/searchable.hpp"
#include "encpol/token.hpp"

namespace encpol::bench {

/// One measured series point.
struct Sample {
  std::string scenario;
  double parameter = 0;  // count or bit width, depending on the scenario
  double mean_ms = 0;
  double stddev_ms = 0;
  int iterations = 0;
};

/// Least-squares line with its coefficient of determination.
struct Fit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;  // clamped to [0, 1]
};

/// Throws std::invalid_argument unless x and y have equal size >= 2 and x
/// has at least two distinct values.
Fit linear_fit(std::span<const double> x, std::span<const double> y);

struct Timing {
  double mean_ms = 0;
  double stddev_ms = 0;
};

/// Runs `warmup` discarded iterations, then times `iterations` runs of fn.
Timing measure(int iterations, int warmup, const std::function<void()>& fn);

struct Options {
  int iterations = 100;  // per sample; must be >= 30
  int warmup = 10;
  std::uint64_t seed = 1;
  SecurityProfile profile = SecurityProfile::production();

  void validate() const;
};

struct ScenarioResult {
  std::vector<Sample> samples;
  std::vector<std::pair<std::string, Fit>> fits;  // series name -> fit
  std::vector<std::string> notes;
};

/// Stable CSV: header "scenario,parameter,mean_ms,stddev_ms,iterations".
void write_csv(std::ostream& out, std::span<const Sample> samples);

/// Deterministic workload builders (identical output for identical inputs).
ConditionExpr string_condition(int comparisons);
ConditionExpr numeric_condition(int comparisons, int bits);
AttributeAssignment string_attributes(int count);
AttributeAssignment numeric_attributes(int count, int bits);

struct SearchWorkload {
  SatTuple probe;                  // matches exactly one stored policy
  std::vector<PolicyAst> policies; // probe target first, fillers after
};
SearchWorkload build_search_workload(int policy_count, std::uint64_t seed);

/// Owns the group, the actor keys and the measurement loops for every
/// scenario. Group generation happens once, in the constructor.
class Harness {
 public:
  explicit Harness(const Options& options);

  /// Client-side encryption and provider-side re-encryption of condition
  /// trees with a growing number of string / numeric comparisons.
  ScenarioResult deploy_condition(std::span<const int> string_counts,
                                  std::span<const int> numeric_counts, int bits);

  /// Same pair of operations for a single numeric comparison of growing
  /// bit width ("< 2^s-1" over s bits).
  ScenarioResult deploy_bits(std::span<const int> bit_sizes);

  /// Attribute trapdoor generation with growing attribute counts.
  ScenarioResult trapdoor_generation(std::span<const int> string_counts,
                                     std::span<const int> numeric_counts, int bits);

  /// Encrypted tuple search against stores of growing size (one matching
  /// policy among fillers). Counts must be positive and ascending.
  ScenarioResult sat_search(std::span<const int> policy_counts);

  /// Condition evaluation with n string comparisons vs n numeric
  /// comparisons of `bits` width, attributes always satisfying the tree.
  ScenarioResult condition_eval(std::span<const int> comparison_counts, int bits);

  /// Tuple encryption vs tuple re-encryption (fixed three-item workload).
  ScenarioResult sat_tuple();

  const Options& options() const { return options_; }
  const SystemParams& params() const { return params_; }

 private:
  Options options_;
  SystemParams params_;
  MasterSecret msk_;
  UserKey admin_key_;
  ServerKey admin_share_;
  UserKey requester_key_;
  ServerKey requester_share_;
  UserKey pip_key_;
  ServerKey pip_share_;
};

}  // namespace encpol::bench

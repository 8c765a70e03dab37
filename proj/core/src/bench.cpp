#include "encpol/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "encpol/clients.hpp"
#include "encpol/service.hpp"

namespace encpol::bench {

namespace {

using Clock = std::chrono::steady_clock;

// Reference point: roughly half a millisecond per stored policy was
// reported for this scheme on 2008-era hardware.
constexpr double kReferencePerPolicyMs = 0.5;

void check_counts(std::span<const int> counts, const char* what) {
  for (int c : counts) {
    if (c < 1)
      throw std::invalid_argument(std::string(what) +
                                  " must be positive (empty workload)");
  }
}

std::string format_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::uint64_t width_max(int bits) {
  return bits == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

Timing reduce(const std::vector<double>& ms) {
  Timing t;
  for (double v : ms) t.mean_ms += v;
  t.mean_ms /= static_cast<double>(ms.size());
  if (ms.size() > 1) {
    double acc = 0;
    for (double v : ms) acc += (v - t.mean_ms) * (v - t.mean_ms);
    t.stddev_ms = std::sqrt(acc / (static_cast<double>(ms.size()) - 1));
  }
  return t;
}

/// Times every point of a series under one schedule: warm-up first, then
/// the iterations split into chunks that round-robin across the points.
/// Slow phases of the host machine then hit all points about equally
/// instead of biasing whichever point happened to run during them.
std::vector<Timing> measure_interleaved(
    int iterations, int warmup, const std::vector<std::function<void()>>& points) {
  for (const auto& fn : points)
    for (int i = 0; i < warmup; ++i) fn();

  std::vector<std::vector<double>> samples(points.size());
  for (auto& s : samples) s.reserve(static_cast<std::size_t>(iterations));
  const int chunk = std::max(1, iterations / 10);
  int collected = 0;
  while (collected < iterations) {
    const int n = std::min(chunk, iterations - collected);
    for (std::size_t p = 0; p < points.size(); ++p) {
      for (int i = 0; i < n; ++i) {
        auto t0 = Clock::now();
        points[p]();
        auto t1 = Clock::now();
        samples[p].push_back(
            std::chrono::duration<double, std::milli>(t1 - t0).count());
      }
    }
    collected += n;
  }

  std::vector<Timing> out;
  out.reserve(points.size());
  for (const auto& s : samples) out.push_back(reduce(s));
  return out;
}

}  // namespace

Fit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit needs at least two (x, y) pairs");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) throw std::invalid_argument("fit needs two distinct x values");

  Fit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy == 0) {
    fit.r2 = 1;  // a constant series is fit exactly
  } else {
    double ss_res = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double e = y[i] - (fit.intercept + fit.slope * x[i]);
      ss_res += e * e;
    }
    fit.r2 = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return fit;
}

Timing measure(int iterations, int warmup, const std::function<void()>& fn) {
  if (iterations < 1) throw std::invalid_argument("iterations must be positive");
  return measure_interleaved(iterations, warmup, {fn}).front();
}

void Options::validate() const {
  if (iterations < 30)
    throw std::invalid_argument("iterations must be at least 30");
  if (warmup < 0) throw std::invalid_argument("warmup must be non-negative");
}

void write_csv(std::ostream& out, std::span<const Sample> samples) {
  out << "scenario,parameter,mean_ms,stddev_ms,iterations\n";
  for (const Sample& s : samples) {
    out << s.scenario << ',' << format_double(s.parameter) << ','
        << format_double(s.mean_ms) << ',' << format_double(s.stddev_ms) << ','
        << s.iterations << '\n';
  }
}

ConditionExpr string_condition(int comparisons) {
  if (comparisons < 1) throw std::invalid_argument("empty condition");
  std::vector<ConditionExpr> kids;
  for (int i = 1; i <= comparisons; ++i)
    kids.push_back(ConditionExpr::compare(
        StringEq{"attributeName" + std::to_string(i),
                 "attributeValue" + std::to_string(i)}));
  if (kids.size() == 1) return std::move(kids.front());
  return ConditionExpr::conjunction(std::move(kids));
}

ConditionExpr numeric_condition(int comparisons, int bits) {
  if (comparisons < 1) throw std::invalid_argument("empty condition");
  if (bits < 1 || bits > 63) throw std::invalid_argument("bits must be in 1..63");
  std::vector<ConditionExpr> kids;
  for (int i = 1; i <= comparisons; ++i)
    kids.push_back(ConditionExpr::compare(
        NumericCmp{"attributeName" + std::to_string(i), CmpOp::Less,
                   width_max(bits), static_cast<unsigned>(bits)}));
  if (kids.size() == 1) return std::move(kids.front());
  return ConditionExpr::conjunction(std::move(kids));
}

AttributeAssignment string_attributes(int count) {
  AttributeAssignment attrs;
  for (int i = 1; i <= count; ++i)
    attrs.set_string("attributeName" + std::to_string(i),
                     "attributeValue" + std::to_string(i));
  return attrs;
}

AttributeAssignment numeric_attributes(int count, int bits) {
  AttributeAssignment attrs;
  // 2^bits - 2 satisfies "< 2^bits - 1" while touching every bit position.
  for (int i = 1; i <= count; ++i)
    attrs.set_numeric("attributeName" + std::to_string(i), width_max(bits) - 1,
                      static_cast<unsigned>(bits));
  return attrs;
}

SearchWorkload build_search_workload(int policy_count, std::uint64_t seed) {
  if (policy_count < 1) throw std::invalid_argument("policy count must be positive");
  std::mt19937_64 rng(seed);
  auto word = [&rng](const char* stem) {
    return std::string(stem) + "-" + std::to_string(rng() % 1000000);
  };

  SatTuple probe{Token::normalize(word("subject")), Token::normalize(word("action")),
                 Token::normalize(word("target"))};
  ConditionExpr cond = string_condition(1);
  std::vector<PolicyAst> policies;
  policies.push_back(PolicyAst{cond, probe});
  for (int i = 1; i < policy_count; ++i) {
    // Fillers differ from the probe in every position.
    SatTuple t{Token::normalize(word("other-subject")),
               Token::normalize(word("other-action")),
               Token::normalize(word("other-target"))};
    policies.push_back(PolicyAst{cond, t});
  }
  return SearchWorkload{std::move(probe), std::move(policies)};
}

Harness::Harness(const Options& options) : options_(options) {
  options_.validate();
  SystemRng rng;
  auto [params, msk] = setup(options_.profile, rng);
  params_ = std::move(params);
  msk_ = std::move(msk);
  std::tie(admin_key_, admin_share_) = issue_keys(params_, msk_, "bench-admin", rng);
  std::tie(requester_key_, requester_share_) =
      issue_keys(params_, msk_, "bench-requester", rng);
  std::tie(pip_key_, pip_share_) = issue_keys(params_, msk_, "bench-pip", rng);
}

ScenarioResult Harness::deploy_condition(std::span<const int> string_counts,
                                         std::span<const int> numeric_counts,
                                         int bits) {
  if (string_counts.empty() && numeric_counts.empty())
    throw std::invalid_argument("empty condition workload");
  check_counts(string_counts, "string comparison count");
  check_counts(numeric_counts, "numeric comparison count");

  struct Point {
    std::string series;
    double x;
    ConditionTree tree;
    ClientTree encrypted;
  };
  SystemRng rng;
  std::vector<Point> points;
  auto add_points = [&](std::span<const int> counts, const char* mode,
                        auto make_condition) {
    for (int count : counts) {
      ConditionTree tree = compile_condition(make_condition(count));
      ClientTree encrypted = encrypt_condition(params_, admin_key_, tree, rng);
      points.push_back(Point{mode, double(count), std::move(tree), std::move(encrypted)});
    }
  };
  add_points(string_counts, "string", [&](int m) { return string_condition(m); });
  add_points(numeric_counts, "numeric",
             [&](int n) { return numeric_condition(n, bits); });

  // Encryption and re-encryption of every point share one schedule.
  std::vector<std::function<void()>> fns;
  for (const Point& p : points) {
    fns.push_back([&, tree = &p.tree] {
      encrypt_condition(params_, admin_key_, *tree, rng);
    });
    fns.push_back([&, enc = &p.encrypted] {
      map_leaves(*enc, [&](const ClientCiphertext& ct) {
        return reencrypt_token(params_, admin_share_, ct);
      });
    });
  }
  std::vector<Timing> timings =
      measure_interleaved(options_.iterations, options_.warmup, fns);

  ScenarioResult result;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point& p = points[i];
    const Timing& enc = timings[2 * i];
    const Timing& reenc = timings[2 * i + 1];
    std::string enc_name = "pd-condition-enc-" + p.series;
    std::string reenc_name = "pd-condition-re-enc-" + p.series;
    result.samples.push_back(
        {enc_name, p.x, enc.mean_ms, enc.stddev_ms, options_.iterations});
    result.samples.push_back(
        {reenc_name, p.x, reenc.mean_ms, reenc.stddev_ms, options_.iterations});
    series[enc_name].first.push_back(p.x);
    series[enc_name].second.push_back(enc.mean_ms);
    series[reenc_name].first.push_back(p.x);
    series[reenc_name].second.push_back(reenc.mean_ms);
  }
  for (const auto& [name, xy] : series) {
    if (xy.first.size() >= 2)
      result.fits.emplace_back(name, linear_fit(xy.first, xy.second));
  }
  return result;
}

ScenarioResult Harness::deploy_bits(std::span<const int> bit_sizes) {
  if (bit_sizes.empty()) throw std::invalid_argument("empty bit-size workload");
  check_counts(bit_sizes, "bit size");

  SystemRng rng;
  std::vector<ConditionTree> trees;
  std::vector<ClientTree> encrypted;
  for (int bits : bit_sizes) {
    trees.push_back(compile_condition(numeric_condition(1, bits)));
    encrypted.push_back(encrypt_condition(params_, admin_key_, trees.back(), rng));
  }

  std::vector<std::function<void()>> fns;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    fns.push_back([&, tree = &trees[i]] {
      encrypt_condition(params_, admin_key_, *tree, rng);
    });
    fns.push_back([&, enc = &encrypted[i]] {
      map_leaves(*enc, [&](const ClientCiphertext& ct) {
        return reencrypt_token(params_, admin_share_, ct);
      });
    });
  }
  std::vector<Timing> timings =
      measure_interleaved(options_.iterations, options_.warmup, fns);

  ScenarioResult result;
  std::vector<double> xs, enc_ms, reenc_ms;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    double bits = bit_sizes[i];
    const Timing& enc = timings[2 * i];
    const Timing& reenc = timings[2 * i + 1];
    result.samples.push_back({"pd-condition-enc-bits", bits, enc.mean_ms,
                              enc.stddev_ms, options_.iterations});
    result.samples.push_back({"pd-condition-re-enc-bits", bits, reenc.mean_ms,
                              reenc.stddev_ms, options_.iterations});
    xs.push_back(bits);
    enc_ms.push_back(enc.mean_ms);
    reenc_ms.push_back(reenc.mean_ms);
  }
  if (xs.size() >= 2) {
    result.fits.emplace_back("pd-condition-enc-bits", linear_fit(xs, enc_ms));
    result.fits.emplace_back("pd-condition-re-enc-bits", linear_fit(xs, reenc_ms));
  }
  return result;
}

ScenarioResult Harness::trapdoor_generation(std::span<const int> string_counts,
                                            std::span<const int> numeric_counts,
                                            int bits) {
  if (string_counts.empty() && numeric_counts.empty())
    throw std::invalid_argument("empty attribute workload");
  check_counts(string_counts, "string attribute count");
  check_counts(numeric_counts, "numeric attribute count");

  struct Point {
    std::string series;
    double x;
    AttributeAssignment attrs;
  };
  std::vector<Point> points;
  for (int count : string_counts)
    points.push_back({"pe-attributes-enc-string", double(count), string_attributes(count)});
  for (int count : numeric_counts)
    points.push_back(
        {"pe-attributes-enc-numeric", double(count), numeric_attributes(count, bits)});

  SystemRng rng;
  std::vector<std::function<void()>> fns;
  for (const Point& p : points) {
    fns.push_back([&, attrs = &p.attrs] {
      encrypt_attributes(params_, pip_key_, *attrs, rng);
    });
  }
  std::vector<Timing> timings =
      measure_interleaved(options_.iterations, options_.warmup, fns);

  ScenarioResult result;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
  for (std::size_t i = 0; i < points.size(); ++i) {
    result.samples.push_back({points[i].series, points[i].x, timings[i].mean_ms,
                              timings[i].stddev_ms, options_.iterations});
    series[points[i].series].first.push_back(points[i].x);
    series[points[i].series].second.push_back(timings[i].mean_ms);
  }
  for (const auto& [name, xy] : series) {
    if (xy.first.size() >= 2)
      result.fits.emplace_back(name, linear_fit(xy.first, xy.second));
  }
  return result;
}

ScenarioResult Harness::sat_search(std::span<const int> policy_counts) {
  if (policy_counts.empty()) throw std::invalid_argument("empty policy-count workload");
  check_counts(policy_counts, "policy count");
  for (std::size_t i = 1; i < policy_counts.size(); ++i) {
    if (policy_counts[i] <= policy_counts[i - 1])
      throw std::invalid_argument("policy counts must be ascending");
  }

  SearchWorkload workload =
      build_search_workload(policy_counts.back(), options_.seed);

  // Deploy every policy once through the real pipeline, then assemble one
  // prefix store per requested size from the re-encrypted records so all
  // sizes can be measured under a single interleaved schedule.
  SystemRng rng;
  KeyStore keys(params_);
  PolicyStore base(params_);
  AdministrationPoint ap(params_, keys, base);
  ap.admit(admin_share_);
  ap.admit(requester_share_);
  for (const PolicyAst& ast : workload.policies)
    ap.deploy(encrypt_policy(params_, admin_key_, ast.sat,
                             compile_condition(ast.condition), rng));

  std::vector<std::unique_ptr<PolicyStore>> stores;
  std::vector<std::unique_ptr<DecisionPoint>> pdps;
  for (int count : policy_counts) {
    auto store = std::make_unique<PolicyStore>(params_);
    for (int i = 0; i < count; ++i) store->append(PolicyRecord(base.record(i)));
    pdps.push_back(std::make_unique<DecisionPoint>(params_, keys, *store));
    stores.push_back(std::move(store));
  }

  EncryptedRequest request =
      encrypt_request(params_, requester_key_, workload.probe, rng);
  for (const auto& pdp : pdps) {
    if (pdp->sat_search(request).size() != 1)
      throw std::runtime_error("search workload invariant violated");
  }

  std::vector<std::function<void()>> fns;
  for (const auto& pdp : pdps)
    fns.push_back([&, p = pdp.get()] { p->sat_search(request); });
  std::vector<Timing> timings =
      measure_interleaved(options_.iterations, options_.warmup, fns);

  ScenarioResult result;
  std::vector<double> xs, ms;
  for (std::size_t i = 0; i < pdps.size(); ++i) {
    result.samples.push_back({"pe-sat-search", double(policy_counts[i]),
                              timings[i].mean_ms, timings[i].stddev_ms,
                              options_.iterations});
    xs.push_back(policy_counts[i]);
    ms.push_back(timings[i].mean_ms);
  }
  if (xs.size() >= 2) {
    Fit fit = linear_fit(xs, ms);
    result.fits.emplace_back("pe-sat-search", fit);
    result.notes.push_back("per-policy match cost: " + format_double(fit.slope) +
                           " ms (reference point: " +
                           format_double(kReferencePerPolicyMs) + " ms)");
  }
  return result;
}

ScenarioResult Harness::condition_eval(std::span<const int> comparison_counts,
                                       int bits) {
  if (comparison_counts.empty())
    throw std::invalid_argument("empty comparison-count workload");
  check_counts(comparison_counts, "comparison count");

  SystemRng rng;
  KeyStore keys(params_);
  PolicyStore policies(params_);
  AdministrationPoint ap(params_, keys, policies);
  ap.admit(admin_share_);
  ap.admit(pip_share_);
  DecisionPoint pdp(params_, keys, policies);

  SatTuple tuple{Token::normalize("bench-subject"), Token::normalize("bench-action"),
                 Token::normalize("bench-target")};

  struct Point {
    std::string series;
    double x;
    const PolicyRecord* record;
    EncryptedAttributes attrs;
  };
  std::vector<Point> points;
  for (int n : comparison_counts) {
    std::uint64_t string_id = ap.deploy(encrypt_policy(
        params_, admin_key_, tuple, compile_condition(string_condition(n)), rng));
    std::uint64_t numeric_id = ap.deploy(encrypt_policy(
        params_, admin_key_, tuple, compile_condition(numeric_condition(n, bits)),
        rng));
    points.push_back({"pe-condition-eval-string", double(n),
                      &policies.record(string_id - 1),
                      encrypt_attributes(params_, pip_key_, string_attributes(n), rng)});
    points.push_back(
        {"pe-condition-eval-numeric", double(n), &policies.record(numeric_id - 1),
         encrypt_attributes(params_, pip_key_, numeric_attributes(n, bits), rng)});
  }
  for (const Point& p : points) {
    if (pdp.evaluate_condition(p.attrs, *p.record).outcome != Outcome::Permit)
      throw std::runtime_error("evaluation workload invariant violated");
  }

  std::vector<std::function<void()>> fns;
  for (const Point& p : points)
    fns.push_back([&, pt = &p] { pdp.evaluate_condition(pt->attrs, *pt->record); });
  std::vector<Timing> timings =
      measure_interleaved(options_.iterations, options_.warmup, fns);

  ScenarioResult result;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
  for (std::size_t i = 0; i < points.size(); ++i) {
    result.samples.push_back({points[i].series, points[i].x, timings[i].mean_ms,
                              timings[i].stddev_ms, options_.iterations});
    series[points[i].series].first.push_back(points[i].x);
    series[points[i].series].second.push_back(timings[i].mean_ms);
  }
  for (std::size_t i = 0; i + 1 < points.size(); i += 2) {
    result.notes.push_back("n=" + format_double(points[i].x) + ": numeric " +
                           format_double(timings[i + 1].mean_ms) + " ms vs string " +
                           format_double(timings[i].mean_ms) + " ms");
  }
  for (const auto& [name, xy] : series) {
    if (xy.first.size() >= 2)
      result.fits.emplace_back(name, linear_fit(xy.first, xy.second));
  }
  // Same abscissa scaled by bits^2: how well n*s^2 predicts the numeric mode.
  const auto& numeric = series["pe-condition-eval-numeric"];
  if (numeric.first.size() >= 2) {
    std::vector<double> ns2(numeric.first);
    for (double& v : ns2) v *= double(bits) * double(bits);
    result.fits.emplace_back("pe-condition-eval-numeric-vs-ns2",
                             linear_fit(ns2, numeric.second));
  }
  return result;
}

ScenarioResult Harness::sat_tuple() {
  SystemRng rng;
  SatTuple tuple{Token::normalize("bench-subject"), Token::normalize("bench-action"),
                 Token::normalize("bench-target")};
  auto encrypted = encrypt_sat(params_, admin_key_, tuple, rng);

  std::vector<std::function<void()>> fns;
  fns.push_back([&] { encrypt_sat(params_, admin_key_, tuple, rng); });
  fns.push_back([&] {
    for (const auto& ct : encrypted) reencrypt_token(params_, admin_share_, ct);
  });
  std::vector<Timing> timings =
      measure_interleaved(options_.iterations, options_.warmup, fns);

  ScenarioResult result;
  result.samples.push_back(
      {"pd-sat-enc", 3, timings[0].mean_ms, timings[0].stddev_ms, options_.iterations});
  result.samples.push_back({"pd-sat-re-enc", 3, timings[1].mean_ms,
                            timings[1].stddev_ms, options_.iterations});
  result.notes.push_back("pd-sat-enc mean " + format_double(timings[0].mean_ms) +
                         " ms, pd-sat-re-enc mean " +
                         format_double(timings[1].mean_ms) + " ms");
  return result;
}

}  // namespace encpol::bench

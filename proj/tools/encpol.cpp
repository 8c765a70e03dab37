// Command-line front end: key authority administration, policy deployment
// and encrypted request evaluation against on-disk stores, plus the
// measurement scenarios.
//
// Exit codes: 0 success/PERMIT, 1 DENY, 2 REJECTED, 64 usage error,
// 65 malformed input, 66 missing file, 70 internal error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "encpol/bench.hpp"
#include "encpol/clients.hpp"
#include "encpol/parser.hpp"
#include "encpol/serial.hpp"
#include "encpol/service.hpp"

namespace fs = std::filesystem;
using namespace encpol;

namespace {

constexpr int kExitPermit = 0;
constexpr int kExitDeny = 1;
constexpr int kExitRejected = 2;
constexpr int kExitUsage = 64;
constexpr int kExitBadData = 65;
constexpr int kExitMissingFile = 66;
constexpr int kExitInternal = 70;

struct MissingFileError {
  fs::path path;
};

struct UsageError {
  std::string message;
};

void require_file(const fs::path& p) {
  if (!fs::exists(p)) throw MissingFileError{p};
}

void require_dir(const fs::path& p) {
  if (!fs::is_directory(p)) throw MissingFileError{p};
}

std::string slurp(const fs::path& p) {
  require_file(p);
  std::ifstream in(p);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path params_file(const fs::path& dir) { return dir / "params.txt"; }
fs::path kma_file(const fs::path& dir) { return dir / "kma.txt"; }
fs::path user_key_file(const fs::path& dir, const std::string& id) {
  return dir / "users" / (id + ".key");
}
fs::path roles_file(const fs::path& dir) { return dir / "roles.txt"; }
fs::path key_store_file(const fs::path& dir) { return dir / "keystore.txt"; }
fs::path policy_store_file(const fs::path& dir) { return dir / "policystore.txt"; }

SystemParams load_params(const fs::path& dir) {
  require_file(params_file(dir));
  std::ifstream in(params_file(dir));
  return read_system_params(in);
}

UserKey load_user_key(const fs::path& dir, const std::string& id) {
  require_file(user_key_file(dir, id));
  std::ifstream in(user_key_file(dir, id));
  return read_user_key(in);
}

SecurityProfile parse_profile(const std::string& text) {
  if (text == "production") return SecurityProfile::production();
  auto sep = text.find(':');
  if (sep != std::string::npos) {
    try {
      int p_bits = std::stoi(text.substr(0, sep));
      int q_bits = std::stoi(text.substr(sep + 1));
      return SecurityProfile::bit_lengths(p_bits, q_bits);
    } catch (const std::exception&) {
      // fall through to the usage error below
    }
  }
  throw UsageError{"--profile must be \"production\" or \"PBITS:QBITS\""};
}

std::unique_ptr<Rng> make_rng(bool seeded, std::uint64_t seed) {
  if (seeded) return std::make_unique<SeededRng>(seed);
  return std::make_unique<SystemRng>();
}

struct KmaInitArgs {
  std::string params_dir;
  std::string profile = "production";
  std::uint64_t seed = 0;
  bool seeded = false;
};

int cmd_kma_init(const KmaInitArgs& args) {
  fs::path dir(args.params_dir);
  fs::create_directories(dir / "users");
  if (fs::exists(kma_file(dir))) {
    std::cerr << "error: " << kma_file(dir).string() << " already exists\n";
    return kExitBadData;
  }
  auto rng = make_rng(args.seeded, args.seed);
  KeyAuthority kma = KeyAuthority::initialise(parse_profile(args.profile), *rng);
  kma.save(kma_file(dir));
  std::ofstream out(params_file(dir), std::ios::trunc);
  write_system_params(out, kma.params());
  std::cout << "initialised key authority in " << dir.string() << " (|p|="
            << kma.params().p.bit_length() << ", |q|=" << kma.params().q.bit_length()
            << ")\n";
  return 0;
}

struct RegisterArgs {
  std::string params_dir;
  std::string store_dir;
  std::string user;
  std::string role = "requester";
  std::uint64_t seed = 0;
  bool seeded = false;
};

int cmd_register(const RegisterArgs& args) {
  fs::path pdir(args.params_dir);
  fs::path sdir(args.store_dir);
  require_file(kma_file(pdir));
  fs::create_directories(sdir);
  fs::create_directories(pdir / "users");

  KeyAuthority kma = KeyAuthority::load(kma_file(pdir));
  auto rng = make_rng(args.seeded, args.seed);
  auto [user_key, server_key] = kma.register_user(args.user, *rng);
  kma.save(kma_file(pdir));

  // User side of the split key stays in the trusted directory.
  std::ofstream ukf(user_key_file(pdir, user_key.user_id), std::ios::trunc);
  write_user_key(ukf, kma.params(), user_key);
  std::ofstream(roles_file(pdir), std::ios::app)
      << user_key.user_id << ' ' << args.role << '\n';

  // Provider side goes to the key store.
  KeyStore keys(kma.params(), key_store_file(sdir));
  PolicyStore policies(kma.params(), policy_store_file(sdir));
  AdministrationPoint ap(kma.params(), keys, policies);
  ap.admit(server_key);

  std::cout << "registered " << user_key.user_id << " as " << args.role << "\n";
  return 0;
}

struct DeployArgs {
  std::string params_dir;
  std::string store_dir;
  std::string user;
  std::string policy_file;
  std::uint64_t seed = 0;
  bool seeded = false;
};

int cmd_deploy(const DeployArgs& args) {
  fs::path pdir(args.params_dir);
  fs::path sdir(args.store_dir);
  require_dir(sdir);
  SystemParams params = load_params(pdir);
  UserKey admin = load_user_key(pdir, args.user);
  std::vector<PolicyAst> asts = parse_policy_file(slurp(args.policy_file));
  if (asts.empty()) {
    std::cerr << "error: no policies in " << args.policy_file << "\n";
    return kExitBadData;
  }

  KeyStore keys(params, key_store_file(sdir));
  PolicyStore policies(params, policy_store_file(sdir));
  AdministrationPoint ap(params, keys, policies);

  auto rng = make_rng(args.seeded, args.seed);
  for (const PolicyAst& ast : asts) {
    ConditionTree tree = compile_condition(ast.condition);
    std::uint64_t id =
        ap.deploy(encrypt_policy(params, admin, ast.sat, tree, *rng));
    std::cout << "deployed policy " << id << "\n";
  }
  return 0;
}

struct RevokeArgs {
  std::string params_dir;
  std::string store_dir;
  std::string user;
};

int cmd_revoke(const RevokeArgs& args) {
  fs::path sdir(args.store_dir);
  require_dir(sdir);
  SystemParams params = load_params(fs::path(args.params_dir));
  KeyStore keys(params, key_store_file(sdir));
  if (keys.erase(args.user)) {
    std::cout << "revoked " << args.user << "\n";
  } else {
    std::cout << "no key held for " << args.user << " (nothing to revoke)\n";
  }
  return 0;
}

struct RequestArgs {
  std::string params_dir;
  std::string store_dir;
  std::string user;
  std::string pip = "pip";
  std::string attrs_file;
  std::vector<std::string> sat;
  std::uint64_t seed = 0;
  bool seeded = false;
};

int cmd_request(const RequestArgs& args) {
  fs::path pdir(args.params_dir);
  fs::path sdir(args.store_dir);
  require_dir(sdir);
  SystemParams params = load_params(pdir);
  UserKey requester = load_user_key(pdir, args.user);
  UserKey pip = load_user_key(pdir, args.pip);
  AttributeAssignment attrs = parse_attributes(slurp(args.attrs_file));

  SatTuple tuple{Token::normalize(args.sat[0]), Token::normalize(args.sat[1]),
                 Token::normalize(args.sat[2])};

  KeyStore keys(params, key_store_file(sdir));
  PolicyStore policies(params, policy_store_file(sdir));
  EnforcementPoint pep(params, keys, policies);

  auto rng = make_rng(args.seeded, args.seed);
  Decision decision = pep.handle(encrypt_request(params, requester, tuple, *rng),
                                 encrypt_attributes(params, pip, attrs, *rng));

  switch (decision.outcome) {
    case Outcome::Permit:
      std::cout << "PERMIT " << *decision.policy_id << "\n";
      return kExitPermit;
    case Outcome::Deny:
      std::cout << "DENY\n";
      return kExitDeny;
    case Outcome::Rejected:
      std::cout << "REJECTED " << decision.reason << "\n";
      return kExitRejected;
  }
  return kExitInternal;
}

struct BenchArgs {
  std::string scenario;
  std::string out;
  std::string profile = "production";
  int iterations = 100;
  std::uint64_t seed = 1;
  int max_comparisons = 10;
  int bits = 0;  // 0 = scenario default
  int min_bits = 2;
  int max_bits = 20;
  int max_policies = 1000;
  int policy_step = 50;
};

std::vector<int> range_1_to(int n) {
  std::vector<int> out;
  for (int i = 1; i <= n; ++i) out.push_back(i);
  return out;
}

int cmd_bench(const BenchArgs& args) {
  bench::Options options;
  options.iterations = args.iterations;
  options.seed = args.seed;
  options.profile = parse_profile(args.profile);
  try {
    options.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError{e.what()};
  }

  std::cerr << "generating group parameters...\n";
  bench::Harness harness(options);

  auto counts = range_1_to(args.max_comparisons);
  std::vector<int> bit_sizes;
  for (int s = args.min_bits; s <= args.max_bits; ++s) bit_sizes.push_back(s);
  std::vector<int> policy_counts;
  for (int c = args.policy_step; c <= args.max_policies; c += args.policy_step)
    policy_counts.push_back(c);

  std::vector<bench::ScenarioResult> results;
  auto want = [&](std::string_view name) {
    return args.scenario == name || args.scenario == "all";
  };
  bool matched = false;
  if (want("deploy-condition")) {
    matched = true;
    results.push_back(
        harness.deploy_condition(counts, counts, args.bits ? args.bits : 4));
  }
  if (want("deploy-bits")) {
    matched = true;
    results.push_back(harness.deploy_bits(bit_sizes));
  }
  if (want("trapdoor-gen")) {
    matched = true;
    results.push_back(
        harness.trapdoor_generation(counts, counts, args.bits ? args.bits : 4));
  }
  if (want("sat-search")) {
    matched = true;
    results.push_back(harness.sat_search(policy_counts));
  }
  if (want("condition-eval")) {
    matched = true;
    results.push_back(harness.condition_eval(counts, args.bits ? args.bits : 5));
  }
  if (want("sat-tuple")) {
    matched = true;
    results.push_back(harness.sat_tuple());
  }
  if (!matched)
    throw UsageError{
        "unknown scenario \"" + args.scenario +
        "\" (expected deploy-condition, deploy-bits, trapdoor-gen, sat-search, "
        "condition-eval, sat-tuple or all)"};

  std::vector<bench::Sample> samples;
  for (const auto& r : results)
    samples.insert(samples.end(), r.samples.begin(), r.samples.end());

  std::ofstream file;
  bool to_file = !args.out.empty();
  if (to_file) {
    file.open(args.out, std::ios::trunc);
    if (!file) {
      std::cerr << "error: cannot write " << args.out << "\n";
      return kExitMissingFile;
    }
  }
  bench::write_csv(to_file ? file : std::cout, samples);

  std::ostream& summary = to_file ? std::cout : std::cerr;
  for (const auto& r : results) {
    for (const auto& [name, fit] : r.fits)
      summary << name << ": slope=" << fit.slope << " ms, intercept=" << fit.intercept
              << " ms, r2=" << fit.r2 << "\n";
    for (const auto& note : r.notes) summary << note << "\n";
  }
  if (to_file) summary << "wrote " << samples.size() << " samples to " << args.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Encrypted policy enforcement for outsourced environments"};
  app.require_subcommand(1);

  KmaInitArgs kma_args;
  auto* kma_cmd = app.add_subcommand(
      "kma-init", "Generate system parameters and the master secret");
  kma_cmd->add_option("--params", kma_args.params_dir, "trusted state directory")
      ->required();
  kma_cmd->add_option("--profile", kma_args.profile, "production or PBITS:QBITS");
  auto* kma_seed = kma_cmd->add_option("--seed", kma_args.seed,
                                       "deterministic randomness (testing only)");

  RegisterArgs reg_args;
  auto* reg_cmd =
      app.add_subcommand("register", "Issue a split key pair for a new user");
  reg_cmd->add_option("--params", reg_args.params_dir, "trusted state directory")
      ->required();
  reg_cmd->add_option("--store", reg_args.store_dir, "provider store directory")
      ->required();
  reg_cmd->add_option("--user", reg_args.user, "user id")->required();
  reg_cmd->add_option("--role", reg_args.role, "admin, requester or pip")
      ->check(CLI::IsMember({"admin", "requester", "pip"}));
  auto* reg_seed = reg_cmd->add_option("--seed", reg_args.seed,
                                       "deterministic randomness (testing only)");

  DeployArgs dep_args;
  auto* dep_cmd =
      app.add_subcommand("deploy", "Encrypt and deploy policies from a file");
  dep_cmd->add_option("--params", dep_args.params_dir, "trusted state directory")
      ->required();
  dep_cmd->add_option("--store", dep_args.store_dir, "provider store directory")
      ->required();
  dep_cmd->add_option("--user", dep_args.user, "admin user id")->required();
  dep_cmd->add_option("--policy", dep_args.policy_file, "policy file")->required();
  auto* dep_seed = dep_cmd->add_option("--seed", dep_args.seed,
                                       "deterministic randomness (testing only)");

  RevokeArgs rev_args;
  auto* rev_cmd =
      app.add_subcommand("revoke", "Remove a user's key share from the key store");
  rev_cmd->add_option("--params", rev_args.params_dir, "trusted state directory")
      ->required();
  rev_cmd->add_option("--store", rev_args.store_dir, "provider store directory")
      ->required();
  rev_cmd->add_option("--user", rev_args.user, "user id")->required();

  RequestArgs req_args;
  auto* req_cmd = app.add_subcommand(
      "request", "Evaluate an encrypted access request (prints PERMIT/DENY/REJECTED)");
  req_cmd->add_option("--params", req_args.params_dir, "trusted state directory")
      ->required();
  req_cmd->add_option("--store", req_args.store_dir, "provider store directory")
      ->required();
  req_cmd->add_option("--user", req_args.user, "requester id")->required();
  req_cmd->add_option("--pip", req_args.pip, "attribute source id (default: pip)");
  req_cmd->add_option("--attrs", req_args.attrs_file, "attribute file")->required();
  req_cmd->add_option("sat", req_args.sat, "subject action target")
      ->expected(3)
      ->required();
  auto* req_seed = req_cmd->add_option("--seed", req_args.seed,
                                       "deterministic randomness (testing only)");

  BenchArgs bench_args;
  auto* bench_cmd =
      app.add_subcommand("bench", "Run a measurement scenario and write CSV");
  bench_cmd->add_option("scenario", bench_args.scenario,
                        "deploy-condition, deploy-bits, trapdoor-gen, sat-search, "
                        "condition-eval, sat-tuple or all")
      ->required();
  bench_cmd->add_option("--out", bench_args.out, "CSV output file (default stdout)");
  bench_cmd->add_option("--iterations", bench_args.iterations,
                        "iterations per sample (>= 30)");
  bench_cmd->add_option("--seed", bench_args.seed, "workload seed");
  bench_cmd->add_option("--profile", bench_args.profile, "production or PBITS:QBITS");
  bench_cmd->add_option("--max-comparisons", bench_args.max_comparisons,
                        "largest comparison/attribute count");
  bench_cmd->add_option("--bits", bench_args.bits, "numeric comparison bit width");
  bench_cmd->add_option("--min-bits", bench_args.min_bits, "deploy-bits lower bound");
  bench_cmd->add_option("--max-bits", bench_args.max_bits, "deploy-bits upper bound");
  bench_cmd->add_option("--max-policies", bench_args.max_policies,
                        "largest store size for sat-search");
  bench_cmd->add_option("--policy-step", bench_args.policy_step,
                        "store size increment for sat-search");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  kma_args.seeded = kma_seed->count() > 0;
  reg_args.seeded = reg_seed->count() > 0;
  dep_args.seeded = dep_seed->count() > 0;
  req_args.seeded = req_seed->count() > 0;

  try {
    if (kma_cmd->parsed()) return cmd_kma_init(kma_args);
    if (reg_cmd->parsed()) return cmd_register(reg_args);
    if (dep_cmd->parsed()) return cmd_deploy(dep_args);
    if (rev_cmd->parsed()) return cmd_revoke(rev_args);
    if (req_cmd->parsed()) return cmd_request(req_args);
    if (bench_cmd->parsed()) return cmd_bench(bench_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.message << "\n";
    return kExitUsage;
  } catch (const MissingFileError& e) {
    std::cerr << "error: missing file or directory: " << e.path.string() << "\n";
    return kExitMissingFile;
  } catch (const UnknownPrincipalError& e) {
    std::cout << "REJECTED " << e.what() << "\n";
    return kExitRejected;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadData;
  } catch (const SerialError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

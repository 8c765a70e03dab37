#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout only
};

std::string cli_path() {
  const char* env = std::getenv("ENCPOL_CLI");
  if (!env) throw std::runtime_error("ENCPOL_CLI is not set");
  return env;
}

RunResult run(const std::string& args) {
  std::string command = cli_path() + " " + args + " 2>/dev/null";
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed");
  RunResult result;
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) result.output += buf;
  int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::trunc);
  out << content;
}

class CliFlow : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(fs::temp_directory_path() /
                        ("encpol-cli-" + std::to_string(::getpid())));
    fs::create_directories(*dir_);
    trust_ = (*dir_ / "trust").string();
    store_ = (*dir_ / "store").string();

    write_file(*dir_ / "ward.policy",
               "IF Location=HR-WARD AND AT>9#5 AND AT<17#5 "
               "THEN CAN <doctor, read, record-42>\n");
    write_file(*dir_ / "ok.attrs", "Location=HR-WARD\nAT:=10#5\n");
    write_file(*dir_ / "early.attrs", "Location=HR-WARD\nAT:=8#5\n");
    write_file(*dir_ / "bad.policy", "IF AT>40#5 THEN CAN <s, a, t>\n");

    // One key authority and three principals for the whole suite.
    ASSERT_EQ(run("kma-init --params " + trust_ + " --profile 512:160").exit_code, 0);
    ASSERT_EQ(run("register --params " + trust_ + " --store " + store_ +
                  " --user alice --role admin").exit_code, 0);
    ASSERT_EQ(run("register --params " + trust_ + " --store " + store_ +
                  " --user bob --role requester").exit_code, 0);
    ASSERT_EQ(run("register --params " + trust_ + " --store " + store_ +
                  " --user pip --role pip").exit_code, 0);
  }

  static void TearDownTestSuite() {
    fs::remove_all(*dir_);
    delete dir_;
    dir_ = nullptr;
  }

  static fs::path* dir_;
  static std::string trust_;
  static std::string store_;
};

fs::path* CliFlow::dir_ = nullptr;
std::string CliFlow::trust_;
std::string CliFlow::store_;

}  // namespace

TEST_F(CliFlow, A_DeployAndPermit) {
  RunResult deploy = run("deploy --params " + trust_ + " --store " + store_ +
                         " --user alice --policy " + (*dir_ / "ward.policy").string());
  EXPECT_EQ(deploy.exit_code, 0);
  EXPECT_NE(deploy.output.find("deployed policy 1"), std::string::npos);

  RunResult permit = run("request --params " + trust_ + " --store " + store_ +
                         " --user bob --attrs " + (*dir_ / "ok.attrs").string() +
                         " doctor read record-42");
  EXPECT_EQ(permit.exit_code, 0);
  EXPECT_EQ(permit.output.substr(0, 6), "PERMIT");
}

TEST_F(CliFlow, B_DenyPaths) {
  RunResult early = run("request --params " + trust_ + " --store " + store_ +
                        " --user bob --attrs " + (*dir_ / "early.attrs").string() +
                        " doctor read record-42");
  EXPECT_EQ(early.exit_code, 1);
  EXPECT_EQ(early.output.substr(0, 4), "DENY");

  RunResult wrong_tuple = run("request --params " + trust_ + " --store " + store_ +
                              " --user bob --attrs " + (*dir_ / "ok.attrs").string() +
                              " nurse read record-42");
  EXPECT_EQ(wrong_tuple.exit_code, 1);
}

TEST_F(CliFlow, C_RevocationRejects) {
  ASSERT_EQ(run("register --params " + trust_ + " --store " + store_ +
                " --user mallory").exit_code, 0);
  EXPECT_EQ(run("revoke --params " + trust_ + " --store " + store_ +
                " --user mallory").exit_code, 0);

  RunResult rejected = run("request --params " + trust_ + " --store " + store_ +
                           " --user mallory --attrs " + (*dir_ / "ok.attrs").string() +
                           " doctor read record-42");
  EXPECT_EQ(rejected.exit_code, 2);
  EXPECT_EQ(rejected.output.substr(0, 8), "REJECTED");

  // Revoking an unknown id is a no-op, not an error.
  RunResult unknown = run("revoke --params " + trust_ + " --store " + store_ +
                          " --user ghost");
  EXPECT_EQ(unknown.exit_code, 0);
  EXPECT_NE(unknown.output.find("nothing to revoke"), std::string::npos);
}

TEST_F(CliFlow, D_ErrorExitCodes) {
  EXPECT_EQ(run("no-such-command").exit_code, 64);
  EXPECT_EQ(run("request --params " + trust_).exit_code, 64);  // missing options
  EXPECT_EQ(run("bench sat-tuple --iterations 5 --profile 512:160").exit_code, 64);

  EXPECT_EQ(run("request --params /nonexistent --store " + store_ +
                " --user bob --attrs " + (*dir_ / "ok.attrs").string() +
                " doctor read record-42").exit_code, 66);
  EXPECT_EQ(run("deploy --params " + trust_ + " --store " + store_ +
                " --user alice --policy /nonexistent.policy").exit_code, 66);
  EXPECT_EQ(run("request --params " + trust_ + " --store " + store_ +
                " --user nobody --attrs " + (*dir_ / "ok.attrs").string() +
                " doctor read record-42").exit_code, 66);  // no key file

  EXPECT_EQ(run("deploy --params " + trust_ + " --store " + store_ +
                " --user alice --policy " + (*dir_ / "bad.policy").string())
                .exit_code, 65);
  EXPECT_EQ(run("register --params " + trust_ + " --store " + store_ +
                " --user alice").exit_code, 65);  // duplicate id
}

TEST_F(CliFlow, E_DeployByRevokedAdminIsRejected) {
  ASSERT_EQ(run("register --params " + trust_ + " --store " + store_ +
                " --user eve --role admin").exit_code, 0);
  ASSERT_EQ(run("revoke --params " + trust_ + " --store " + store_ +
                " --user eve").exit_code, 0);
  RunResult d = run("deploy --params " + trust_ + " --store " + store_ +
                    " --user eve --policy " + (*dir_ / "ward.policy").string());
  EXPECT_EQ(d.exit_code, 2);
  EXPECT_EQ(d.output.substr(0, 8), "REJECTED");
}

TEST_F(CliFlow, F_BenchWritesCsv) {
  fs::path csv = *dir_ / "bench.csv";
  RunResult r = run("bench sat-tuple --iterations 30 --profile 512:160 --out " +
                    csv.string());
  EXPECT_EQ(r.exit_code, 0);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "scenario,parameter,mean_ms,stddev_ms,iterations");
  std::string row;
  int rows = 0;
  while (std::getline(in, row))
    if (!row.empty()) ++rows;
  EXPECT_EQ(rows, 2);  // pd-sat-enc and pd-sat-re-enc
}

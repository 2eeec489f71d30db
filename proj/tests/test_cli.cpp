#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run sprego(const std::string& args) {
  const std::string cmd = std::string("cd '") + SPREGO_SOURCE_DIR + "' && '" + SPREGO_CLI + "' " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

TEST(Cli, EvalScalar) {
  const auto r = sprego("eval '=1+2'");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "3\n");
}

TEST(Cli, EvalArrayAsTsvAndCell) {
  const auto r = sprego("eval -w data/lol_sample.csv '{=FIND(\"(\",C2:C4)}'");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "10\n16\n15\n");
  const auto c = sprego("eval -w data/lol_sample.csv --cell '{=LEFT(C2:C15,FIND(\"(\",C2:C15)-2)}'");
  EXPECT_EQ(c.out, "ReisenII\n");
}

TEST(Cli, EvalWithSetAndScript) {
  const auto r = sprego("eval --script tasks/task4.sprego --set H1003=500 '{=SUM(IF(I2:I15>H1003,1))}'");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out, "4\n");
}

TEST(Cli, StrictTurnsErrorsIntoExitThree) {
  EXPECT_EQ(sprego("eval '=1/0'").code, 0);
  const auto r = sprego("eval --strict '=1/0'");
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.out, "#DIV/0!\n");
}

TEST(Cli, ExitCodes) {
  const auto parse = sprego("eval '=1+'");
  EXPECT_EQ(parse.code, 2);
  EXPECT_NE(parse.out.find("offset 3"), std::string::npos);
  EXPECT_EQ(sprego("eval -w no/such.csv '=1'").code, 4);
  EXPECT_EQ(sprego("run no/such.sprego").code, 4);
}

TEST(Cli, RunReportsAndExports) {
  const auto out = std::filesystem::temp_directory_path() / "sprego_cli_export.csv";
  const auto r = sprego("run tasks/task1.sprego --export '" + out.string() + "'");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("EXPECT J2:L15 PASS"), std::string::npos);
  EXPECT_NE(r.out.find("SUMMARY 1 passed, 0 failed"), std::string::npos);
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, ",Title,Account (server),Theme and time,NOF comments,NOF views,,,,,,");
  std::filesystem::remove(out);
}

TEST(Cli, RunIsByteForByteRepeatable) {
  for (int i = 1; i <= 6; ++i) {
    const std::string path = "tasks/task" + std::to_string(i) + ".sprego";
    const auto a = sprego("run " + path), b = sprego("run " + path);
    EXPECT_EQ(a.code, 0) << a.out;
    EXPECT_EQ(a.out, b.out);
  }
}

TEST(Cli, MismatchExitsOne) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto script = dir / "sprego_cli_mismatch.sprego";
  std::ofstream(script) << "SET A1 = 1\nSTEP S A2 = =A1*2\nEXPECT A2 = 3\n";
  const auto r = sprego("run '" + script.string() + "'");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("expected 3, got 2"), std::string::npos);
  std::filesystem::remove(script);
}

TEST(Cli, TraceTaskTwo) {
  const auto r = sprego("trace -w data/lol_sample.csv --from 4 '{=LEFT(E2:E15,FIND(\"new\",E2:E15)-2)*1}' E2:E15");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "NOF comments\tS4\tS5\tS6\tS7");
  EXPECT_NE(r.out.find("0 new Comments\t3\t1\t0\t0\n"), std::string::npos);
  EXPECT_NE(r.out.find("1 new Comment\t3\t1\t1\t1\n"), std::string::npos);
}

TEST(Cli, TraceLiteral) {
  const auto r = sprego("trace '=7'");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "\tS1\n\t7\n");
}

TEST(Cli, ForceTextRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto in = dir / "sprego_text_in.csv";
  std::ofstream(in) << "007,\"a,b\",1e3\n";
  const auto r = sprego("eval --text -w '" + in.string() + "' '{=A1:C1}'");
  EXPECT_EQ(r.out, "007\ta,b\t1e3\n");
  std::filesystem::remove(in);
}

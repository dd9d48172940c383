#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "support.hpp"

using namespace mgt;
namespace fs = std::filesystem;

namespace {

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

int run(const std::string& args, const fs::path& log = "/dev/null") {
  const std::string cmd = q(MGT_CLI_PATH) + " " + args + " >" + q(log) + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string mini(const fs::path& out) {
  return "--train " + q(testing::data_dir() / "mini_train.jsonl") + " --test " + q(testing::data_dir() / "mini_test.jsonl") +
         " --out " + q(out) + " --seed 3 --workers 2 --max-tokens 60 --min-tokens 30" +
         " --detector gltr --detector detectgpt-4d --detector watermark" +
         " --attack typo_mixed=0.1,0.2 --attack syn_free=0.3 --attack cogen_emoji=1 --attack icl";
}

std::string outputs(const fs::path& out) {
  std::string all;
  for (const char* f : {"cells.csv", "leaderboard.csv", "plot.csv"}) all += testing::read_file(out / f);
  return all;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(run("") == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("eval --no-such-flag") == 1);
  CHECK(run("eval --detector roberta --out /nonexistent") == 1);
  CHECK(run("eval --attack bitflip=0.1 --out /nonexistent") == 1);
  CHECK(run("eval --workers 0") == 1);
  CHECK(run("--help") == 0);
}

TEST_CASE("data errors exit with 2") {
  testing::TempDir tmp("cli-data");
  const auto empty = tmp.path() / "empty.jsonl";
  std::ofstream(empty).close();
  for (const char* cmd : {"generate", "attack", "detect", "eval"}) {
    CHECK(run(std::string(cmd) + " --test " + q(empty) + " --train " + q(testing::data_dir() / "mini_train.jsonl") +
              " --out " + q(tmp.path() / "o")) == 2);
  }
  CHECK(run("generate --test " + q(tmp.path() / "missing.jsonl") + " --out " + q(tmp.path() / "o")) == 2);
  CHECK(run("eval --out " + q(tmp.path() / "never-generated") + " --train " + q(testing::data_dir() / "mini_train.jsonl") +
            " --test " + q(testing::data_dir() / "mini_test.jsonl")) == 2);
}

TEST_CASE("backend failures exit with 3") {
  testing::TempDir tmp("cli-backend");
  CHECK(run("generate --backend-cmd 'exit 0' " + mini(tmp.path() / "o")) == 3);
}

TEST_CASE("staged commands reproduce the fused pipeline and re-runs are idempotent") {
  testing::TempDir tmp("cli-staged");
  const auto staged = tmp.path() / "staged";
  const auto fused = tmp.path() / "fused";
  for (const char* cmd : {"generate", "attack", "detect", "eval"}) REQUIRE(run(std::string(cmd) + " " + mini(staged)) == 0);
  REQUIRE(run("eval --fused " + mini(fused)) == 0);
  CHECK(outputs(staged) == outputs(fused));
  CHECK(testing::read_file(staged / "cells.csv").find("incomplete") == std::string::npos);

  const auto mgt = testing::read_file(staged / "mgt.jsonl");
  const auto cells = testing::read_file(staged / "cells.csv");
  REQUIRE(run("generate " + mini(staged)) == 0);
  REQUIRE(run("attack " + mini(staged)) == 0);
  REQUIRE(run("eval " + mini(staged)) == 0);
  CHECK(testing::read_file(staged / "mgt.jsonl") == mgt);
  CHECK(testing::read_file(staged / "cells.csv") == cells);

  const auto board = tmp.path() / "board.txt";
  REQUIRE(run("leaderboard --cells " + q(staged / "cells.csv"), board) == 0);
  CHECK(testing::read_file(board).find("rank,detector,Edit,Para,Prompt,CoGen,overall") != std::string::npos);
}

TEST_CASE("config file with sections and flag overrides") {
  testing::TempDir tmp("cli-config");
  const auto ini = tmp.path() / "run.ini";
  {
    std::ofstream out(ini);
    out << "seed = 3\nworkers = 1\nmax-tokens = 60\nmin-tokens = 30\n"
        << "train = " << (testing::data_dir() / "mini_train.jsonl").string() << "\n"
        << "test = " << (testing::data_dir() / "mini_test.jsonl").string() << "\n"
        << "detector = [\"gltr\", \"detectgpt-4d\", \"watermark\"]\n"
        << "attack = [\"typo_mixed=0.1,0.2\", \"syn_free=0.3\", \"cogen_emoji=1\", \"icl\"]\n"
        << "[eval]\nfused = true\n";
  }
  REQUIRE(run("eval --config " + q(ini) + " --out " + q(tmp.path() / "a")) == 0);
  REQUIRE(run("eval --fused " + mini(tmp.path() / "b")) == 0);
  CHECK(outputs(tmp.path() / "a") == outputs(tmp.path() / "b"));
  REQUIRE(run("eval --config " + q(ini) + " --out " + q(tmp.path() / "c") + " --seed 4") == 0);
  CHECK(outputs(tmp.path() / "a") != outputs(tmp.path() / "c"));
}

TEST_CASE("patch comparison report") {
  testing::TempDir tmp("cli-patch");
  const auto out = tmp.path() / "o";
  REQUIRE(run("generate " + mini(out)) == 0);
  REQUIRE(run("patch-compare --patch-attack typo_mixed=0.2 --patch-detector detectgpt-4d " + mini(out)) == 0);
  const auto report = testing::read_file(out / "patch_compare.csv");
  CHECK(report.find("detector,attack,level,before_attack,after_attack,with_patch") != std::string::npos);
  CHECK(report.find("detectgpt-4d,typo_mixed,0.2,") != std::string::npos);
}

#include <gtest/gtest.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <string>
#include <thread>
#include <vector>

#include "support/test_support.hpp"

#ifndef KGREC_CLI_PATH
#error "KGREC_CLI_PATH must name the kgrec executable"
#endif

namespace kgrec {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("kgrec-cli-" + std::to_string(rd()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string file(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(file(name), std::ios::binary) << text;
    return file(name);
  }

  CliRun run(const std::vector<std::string>& args) const {
    pid_t pid = fork();
    if (pid == 0) {
      if (!std::freopen(file("stdout").c_str(), "w", stdout)) _exit(126);
      if (!std::freopen(file("stderr").c_str(), "w", stderr)) _exit(126);
      std::vector<char*> argv = {const_cast<char*>(KGREC_CLI_PATH)};
      for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
      argv.push_back(nullptr);
      execv(KGREC_CLI_PATH, argv.data());
      _exit(127);
    }
    int status = 0;
    waitpid(pid, &status, 0);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, testing::read_file(file("stdout")),
            testing::read_file(file("stderr"))};
  }

  static std::vector<std::string> fixture() {
    return {"--entities", testing::data_path("fig4/entities.tsv"), "--edges",
            testing::data_path("fig4/edges.tsv")};
  }

  static std::vector<std::string> with(std::vector<std::string> head,
                                       const std::vector<std::string>& tail) {
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  }

  fs::path dir_;
};

TEST_F(CliTest, ValidateFixture) {
  auto r = run(with({"validate"}, fixture()));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "8 entities, 7 edges\n");
}

TEST_F(CliTest, ValidateEmptyFiles) {
  auto r = run({"validate", "--entities", write("e.tsv", ""), "--edges", write("d.tsv", "")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "0 entities, 0 edges\n");
}

TEST_F(CliTest, ValidateReportsLineNumbers) {
  auto ents = write("e.tsv", "a\tmovie\tA\nb\tperson\tB\n");
  auto r = run({"validate", "--entities", ents, "--edges", write("d.tsv", "a\tr\tb\nb\tr\tzz\n")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(":2"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("zz"), std::string::npos) << r.err;
  auto dup = run({"validate", "--entities", write("dup.tsv", "a\tmovie\tA\na\tmovie\tA\n"), "--edges",
                  write("none.tsv", "")});
  EXPECT_EQ(dup.code, 1);
  auto missing = run({"validate", "--entities", file("absent.tsv"), "--edges", file("absent.tsv")});
  EXPECT_EQ(missing.code, 1);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"validate"}).code, 2);
  EXPECT_EQ(run(with({"recommend"}, fixture())).code, 2);
  EXPECT_EQ(run(with({"recommend", "--user", "alice", "--alpha", "2"}, fixture())).code, 2);
  EXPECT_EQ(run(with({"recommend", "--user", "alice", "--method", "magic"}, fixture())).code, 2);
  EXPECT_EQ(run(with({"recommend", "--user", "alice", "--scoring", "best"}, fixture())).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, RecommendMatchesService) {
  const auto log = testing::data_path("fig4/feedback.jsonl");
  auto r = run(with({"recommend", "--user", "alice", "--k", "3", "--max-depth", "4",
                     "--feedback", log},
                    fixture()));
  ASSERT_EQ(r.code, 0) << r.err;

  ServiceOptions o;
  o.params.limits.max_depth = 4;
  auto kg = testing::fig4_graph();
  std::ifstream in(log);
  replay_feedback(in, kg);
  SessionService s(std::move(kg), movie_rules(), o);
  EXPECT_EQ(r.out, s.get_recommendations("alice", "3").body + "\n");
  auto j = Json::parse(r.out);
  ASSERT_FALSE(j.empty());
  EXPECT_EQ(j[0]["movie"], "bridge_of_spies");
}

TEST_F(CliTest, RecommendUnknownUserIsEmpty) {
  auto r = run(with({"recommend", "--user", "nobody"}, fixture()));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "[]\n");
}

TEST_F(CliTest, ExplainInferno) {
  auto r = run(with({"explain", "--user", "alice", "--movie", "inferno", "--feedback",
                     testing::data_path("fig4/feedback.jsonl")},
                    fixture()));
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = Json::parse(r.out);
  std::map<std::string, double> by_entity;
  for (const auto& reason : j) by_entity[reason["entity"]] = reason["contribution"];
  EXPECT_GT(by_entity["tom_hanks"], 0.0);
  EXPECT_LT(by_entity["crime"], 0.0);
  auto bad = run(with({"explain", "--user", "alice", "--movie", "crime"}, fixture()));
  EXPECT_EQ(bad.code, 1);
}

TEST_F(CliTest, QueryScoringRuns) {
  auto r = run(with({"recommend", "--user", "alice", "--scoring", "query", "--feedback",
                     testing::data_path("fig4/feedback.jsonl")},
                    fixture()));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)[0]["movie"], "bridge_of_spies");
}

TEST_F(CliTest, PushMethodRuns) {
  auto r = run(with({"recommend", "--user", "alice", "--method", "push", "--eps", "1e-9",
                     "--feedback", testing::data_path("fig4/feedback.jsonl")},
                    fixture()));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)[0]["movie"], "bridge_of_spies");
}

// Minimal DOT checker for the subset write_dot emits: a digraph header, node
// statements with attribute lists, edge statements, and a closing brace.
bool well_formed_dot(const std::string& dot, std::size_t* solution_nodes) {
  std::istringstream in(dot);
  std::string line;
  static const std::regex quoted(R"("(?:[^"\\]|\\.)*")");
  static const std::regex attrs(R"(\[(?:\s*\w+=(?:\w+|Q)\s*,?)*\s*\];)");
  static const std::regex node(R"(\s*n\d+ )");
  static const std::regex edge(R"(\s*n\d+ -> n\d+ )");
  static const std::regex defaults(R"(\s*node )");
  if (!std::getline(in, line) || line != "digraph proof {") return false;
  bool closed = false;
  *solution_nodes = 0;
  while (std::getline(in, line)) {
    if (closed) return false;
    if (line == "}") {
      closed = true;
      continue;
    }
    std::string flat = std::regex_replace(line, quoted, "Q");
    std::smatch m;
    if (std::regex_search(flat, m, edge, std::regex_constants::match_continuous) ||
        std::regex_search(flat, m, node, std::regex_constants::match_continuous) ||
        std::regex_search(flat, m, defaults, std::regex_constants::match_continuous)) {
      std::string rest = m.suffix();
      if (!std::regex_match(rest, attrs)) return false;
      if (rest.find("shape=doublecircle") != std::string::npos) ++*solution_nodes;
      continue;
    }
    return false;
  }
  return closed;
}

TEST_F(CliTest, GroundWritesDot) {
  const auto dot = file("proof.dot");
  auto r = run(with({"ground", "--query", "willLike(alice,E,M)", "--max-depth", "4", "--dot", dot,
                     "--feedback", write("fb.jsonl",
                                         R"({"user":"alice","predicate":"likesEntity","target":"tom_hanks","ts":1})"
                                         "\n"
                                         R"({"user":"alice","predicate":"likesMovie","target":"da_vinci_code","ts":2})"
                                         "\n")},
                    fixture()));
  ASSERT_EQ(r.code, 0) << r.err;
  auto summary = Json::parse(r.out);
  EXPECT_EQ(summary["solutions"], 6);
  EXPECT_EQ(summary["truncated"], true);
  std::size_t solutions = 0;
  const std::string text = testing::read_file(dot);
  EXPECT_TRUE(well_formed_dot(text, &solutions)) << text;
  EXPECT_EQ(solutions, 6u);
  EXPECT_FALSE(well_formed_dot("digraph proof {\n  n0 -> [label=\"x\"];\n}\n", &solutions));

  auto bad = run(with({"ground", "--query", "wontLike(alice,E,M)"}, fixture()));
  EXPECT_EQ(bad.code, 1);
}

TEST_F(CliTest, ServeAnswersHealthAndStopsOnSigterm) {
  // pick a free port, then release it for the child
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  ASSERT_GT(port, 0);
  const auto log = file("served.jsonl");
  pid_t pid = fork();
  if (pid == 0) {
    if (!std::freopen(file("serve.err").c_str(), "w", stderr)) _exit(126);
    auto args = with({"serve", "--host", "127.0.0.1", "--port", std::to_string(port),
                      "--feedback-log", log},
                     fixture());
    std::vector<char*> argv = {const_cast<char*>(KGREC_CLI_PATH)};
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    execv(KGREC_CLI_PATH, argv.data());
    _exit(127);
  }
  httplib::Client client("127.0.0.1", port);
  httplib::Result health;
  for (int i = 0; i < 100 && !health; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    health = client.Get("/health");
  }
  ASSERT_TRUE(health) << testing::read_file(file("serve.err"));
  EXPECT_EQ(Json::parse(health->body), Json::parse(R"({"entities":8,"edges":7,"users":1})"));
  auto post = client.Post("/v1/users/alice/feedback",
                          R"({"predicate":"likesEntity","target":"tom_hanks"})", "application/json");
  ASSERT_TRUE(post);
  EXPECT_EQ(post->status, 204);

  kill(pid, SIGTERM);
  int status = 0;
  waitpid(pid, &status, 0);
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
  EXPECT_NE(testing::read_file(log).find("\"tom_hanks\""), std::string::npos);
}

}  // namespace
}  // namespace kgrec

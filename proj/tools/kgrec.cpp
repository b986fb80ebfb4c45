// kgrec: validate knowledge-graph files, run one-shot recommendations,
// dump proof graphs and serve the HTTP API.
//
// Exit codes: 0 success, 1 validation or data error, 2 usage error.

#include <pthread.h>
#include <signal.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "kgrec/kgrec.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct GraphFlags {
  std::string entities;
  std::string edges;
  std::string feedback;
  std::string rules;
};

struct SolverFlags {
  kgrec::EngineParams params;
  std::string method = "power";
  std::string scoring = "per-fact";
};

void add_graph_flags(CLI::App* cmd, GraphFlags& g, bool with_feedback) {
  cmd->add_option("--entities,--kg-entities", g.entities, "entities TSV (id, kind, name)")
      ->required();
  cmd->add_option("--edges,--kg-edges", g.edges, "edges TSV (src, relation, dst)")->required();
  if (with_feedback) {
    cmd->add_option("--feedback,--feedback-log", g.feedback, "feedback JSONL log");
    cmd->add_option("--rules", g.rules, "rule program (default: built-in movie rules)");
  }
}

void add_solver_flags(CLI::App* cmd, SolverFlags& s) {
  auto& p = s.params;
  cmd->add_option("--alpha", p.ppr.alpha, "PPR restart probability")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--eps", p.ppr.eps, "push residual threshold")->capture_default_str();
  cmd->add_option("--tol", p.ppr.tol, "power-iteration L1 tolerance")->capture_default_str();
  cmd->add_option("--max-iter", p.ppr.max_iter, "power-iteration cap")->capture_default_str();
  cmd->add_option("--method", s.method, "PPR solver")
      ->check(CLI::IsMember({"power", "push"}))
      ->capture_default_str();
  cmd->add_option("--scoring", s.scoring, "pair scoring: one PPR per feedback fact, or one per query")
      ->check(CLI::IsMember({"per-fact", "query"}))
      ->capture_default_str();
  cmd->add_option("--max-depth", p.limits.max_depth, "rule resolutions per proof path")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-nodes", p.limits.max_nodes, "proof-graph node cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

kgrec::EngineParams engine_params(const SolverFlags& s) {
  kgrec::EngineParams p = s.params;
  p.ppr.method = s.method == "push" ? kgrec::PprMethod::push : kgrec::PprMethod::power;
  p.scoring = *kgrec::parse_pair_scoring(s.scoring);
  return p;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw kgrec::Error("cannot open '" + path + "'");
  return in;
}

kgrec::KnowledgeGraph load(const GraphFlags& g) {
  auto entities_in = open_input(g.entities);
  auto edges_in = open_input(g.edges);
  kgrec::KnowledgeGraph kg = kgrec::load_graph(entities_in, edges_in, g.entities, g.edges);
  if (!g.feedback.empty()) {
    std::ifstream fb(g.feedback);
    if (fb) kgrec::replay_feedback(fb, kg, g.feedback);
  }
  return kg;
}

kgrec::RuleSet load_rules(const GraphFlags& g) {
  if (g.rules.empty()) return kgrec::movie_rules();
  auto in = open_input(g.rules);
  std::stringstream text;
  text << in.rdbuf();
  return kgrec::parse_rules(text.str(), g.rules);
}

int run_validate(const GraphFlags& g) {
  auto kg = load(g);
  std::cout << kg.entity_count() << " entities, " << kg.edge_count() << " edges\n";
  return kExitOk;
}

// Prints the same body the service returns for GET .../recommendations.
int run_recommend(const GraphFlags& g, const SolverFlags& s, const std::string& user,
                  std::size_t k) {
  kgrec::ServiceOptions opts;
  opts.params = engine_params(s);
  opts.max_k = std::max(opts.max_k, k);
  kgrec::SessionService service(load(g), load_rules(g), opts);
  auto r = service.get_recommendations(user, std::to_string(k));
  if (r.status != 200) {
    std::cerr << "kgrec: " << r.body << "\n";
    return kExitData;
  }
  std::cout << r.body << "\n";
  return kExitOk;
}

int run_explain(const GraphFlags& g, const SolverFlags& s, const std::string& user,
                const std::string& movie) {
  kgrec::ServiceOptions opts;
  opts.params = engine_params(s);
  kgrec::SessionService service(load(g), load_rules(g), opts);
  auto r = service.get_explanation(user, movie);
  if (r.status != 200) {
    std::cerr << "kgrec: " << r.body << "\n";
    return kExitData;
  }
  std::cout << r.body << "\n";
  return kExitOk;
}

int run_ground(const GraphFlags& g, const SolverFlags& s, const std::string& query_text,
               const std::string& dot_path) {
  auto kg = load(g);
  auto rules = load_rules(g);
  auto query = kgrec::parse_literal(query_text);
  auto pg = kgrec::ground(query, rules, kg, engine_params(s).limits);
  if (!dot_path.empty()) {
    std::ofstream out(dot_path);
    if (!out) throw kgrec::Error("cannot write '" + dot_path + "'");
    kgrec::write_dot(out, pg, rules);
  }
  kgrec::Json summary;
  summary["nodes"] = pg.size();
  summary["edges"] = pg.edges().size();
  summary["solutions"] = pg.solution_nodes().size();
  summary["truncated"] = pg.truncated();
  std::cout << summary.dump() << "\n";
  return kExitOk;
}

int run_serve(const GraphFlags& g, const SolverFlags& s, const std::string& host, int port) {
  // Handle SIGINT/SIGTERM on a dedicated thread; every other thread,
  // including the server's workers, inherits the blocked mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  kgrec::ServiceOptions opts;
  opts.params = engine_params(s);
  opts.feedback_log = g.feedback;
  auto kg = load(GraphFlags{g.entities, g.edges, "", g.rules});
  kgrec::SessionService service(std::move(kg), load_rules(g), opts);

  httplib::Server server;
  service.mount(server);

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });

  if (!server.bind_to_port(host, port)) {
    std::cerr << "kgrec: cannot bind " << host << ":" << port << "\n";
    kill(getpid(), SIGTERM);
    waiter.join();
    return kExitData;
  }
  std::cerr << "kgrec: listening on " << host << ":" << port << "\n";
  server.listen_after_bind();
  if (server.is_running()) server.stop();
  // listen returned on its own: wake the signal thread so it can exit.
  if (waiter.joinable()) {
    kill(getpid(), SIGTERM);
    waiter.join();
  }
  service.flush();
  std::cerr << "kgrec: shut down\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explainable knowledge-graph movie recommendations"};
  app.require_subcommand(1);

  GraphFlags graph;
  SolverFlags solver;

  auto* validate = app.add_subcommand("validate", "load and check entity/edge files");
  add_graph_flags(validate, graph, false);

  std::string user;
  std::size_t k = 10;
  auto* rec = app.add_subcommand("recommend", "print recommendations for a user as JSON");
  add_graph_flags(rec, graph, true);
  add_solver_flags(rec, solver);
  rec->add_option("--user", user, "user id")->required();
  rec->add_option("--k", k, "number of recommendations")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::string movie;
  auto* expl = app.add_subcommand("explain", "print the reasons for one movie as JSON");
  add_graph_flags(expl, graph, true);
  add_solver_flags(expl, solver);
  expl->add_option("--user", user, "user id")->required();
  expl->add_option("--movie", movie, "movie id")->required();

  std::string query, dot;
  auto* grd = app.add_subcommand("ground", "ground a query and write its proof graph");
  add_graph_flags(grd, graph, true);
  add_solver_flags(grd, solver);
  grd->add_option("--query", query, "query literal, e.g. willLike(alice,E,M)")->required();
  grd->add_option("--dot", dot, "write the proof graph in DOT format");

  std::string host = "0.0.0.0";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "run the HTTP session service");
  add_graph_flags(serve, graph, true);
  add_solver_flags(serve, solver);
  serve->add_option("--port", port, "listen port")->capture_default_str();
  serve->add_option("--host", host, "listen address")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*validate) return run_validate(graph);
    if (*rec) return run_recommend(graph, solver, user, k);
    if (*expl) return run_explain(graph, solver, user, movie);
    if (*grd) return run_ground(graph, solver, query, dot);
    if (*serve) return run_serve(graph, solver, host, port);
  } catch (const kgrec::Error& e) {
    std::cerr << "kgrec: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "qmkit/cli.hpp"

using namespace qmkit::cli;

namespace {

RunConfig make(std::vector<std::string> command, std::map<std::string, std::string> params,
               std::string model = "free 2") {
  RunConfig cfg;
  cfg.command = std::move(command);
  cfg.params = std::move(params);
  cfg.model = std::move(model);
  return cfg;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("qm eval") {
    auto rep = execute(make({"qm", "eval"}, {{"spec", "count(w=ab,W=1)"}, {"g", "abab"}}));
    CHECK(rep.exit_code == kOk);
    CHECK(rep.doc["results"]["value"] == "2");
    CHECK(rep.doc["tool"] == "qmkit");
    CHECK(rep.doc["config"]["seed"] == 1);
  }

  TEST_CASE("usage and computation errors") {
    CHECK(execute(make({"qm", "eval"}, {{"spec", "count(w=ab"}, {"g", "a"}})).exit_code == kUsage);
    CHECK(execute(make({"qm", "nope"}, {})).exit_code == kUsage);
    CHECK(execute(make({"qm", "eval"}, {{"spec", "count(w=ab,W=1)"}})).exit_code == kUsage);
    CHECK(execute(make({"qm", "eval"}, {{"spec", "count(w=ab,W=1)"}, {"g", "a"}, {"x", "1"}})).exit_code ==
          kUsage);
    auto cfg = make({"qm", "eval"}, {{"spec", "count(w=ab,W=1)"}, {"g", "a"}}, "");
    CHECK(execute(cfg).exit_code == kUsage);
    // Free(1) certification fails independence: inconclusive, exit 1.
    auto line = execute(make({"ends", "classify"}, {{"f", "hom(a=1)"}, {"g1", "a"}, {"g2", "a"}}, "free 1"));
    CHECK(line.exit_code == kComputation);
    CHECK(line.doc["results"]["verdict"] == "inconclusive");
    // Non-integer f cannot be scaled.
    auto half = execute(make({"manning", "scale"}, {{"f", "1/2*hom(a=1,b=1)"}}));
    CHECK(half.doc["status"] == "error");
    CHECK(half.doc["error"]["type"] == "parse");
  }

  TEST_CASE("csv tables") {
    auto rep = execute(make({"geom", "bottleneck"}, {{"pairs", "auto"}}));
    CHECK(rep.exit_code == kOk);
    std::string csv = emit_csv(rep, "growth");
    CHECK(csv.rfind("k,delta_min\r\n", 0) == 0);
    CHECK_THROWS(emit_csv(rep, "nope"));
    auto rk = execute(make({"qm", "rank"},
                           {{"spec", "count(w=ab,W=1);count(w=abb,W=1)"}, {"g", "ab,abb"}}));
    CHECK(emit_csv(rk, "matrix").find("\"homog(count(w=ab,W=1))\",1,1") != std::string::npos);
  }

  TEST_CASE("determinism and replay") {
    auto cfg = make({"geom", "delta"}, {{"samples", "500"}});
    cfg.radius = 2;
    cfg.seed = 7;
    CHECK(execute(cfg).doc.dump() == execute(cfg).doc.dump());
    auto rep = execute(cfg);
    CHECK(config_from_json(rep.doc["config"]).params == cfg.params);
    const std::string path = "qmkit_cli_replay_test.json";
    {
      std::ofstream f(path);
      f << rep.doc.dump(2);
    }
    auto again = execute(make({"replay"}, {{"report", path}}));
    CHECK(again.exit_code == kOk);
    CHECK(again.doc["results"]["identical"] == true);
    std::remove(path.c_str());
  }

  TEST_CASE("argument parsing") {
    const char* argv[] = {"qmkit", "ends", "connect", "--model", "free 2", "--f", "hom(a=1,b=1)",
                          "--u", "a^10", "--v", "b^10", "--C", "2", "--D", "10", "--radius", "30",
                          "--csv", "x=y.csv"};
    RunConfig cfg;
    int code = 0;
    REQUIRE(parse_args(19, argv, cfg, code));
    CHECK(cfg.command == std::vector<std::string>{"ends", "connect"});
    CHECK(cfg.radius == 30);
    CHECK(cfg.params.at("C") == "2");
    CHECK(cfg.csv.at("x") == "y.csv");
    auto rep = execute(cfg);
    CHECK(rep.doc["results"]["search"]["outcome"] == "disconnected_certificate");
    const char* rank[] = {"qmkit", "qm", "rank", "--model", "free 2", "--spec", "count(w=ab,W=1)",
                          "--spec", "count(w=abb,W=1)", "--g", "ab", "--g", "abb"};
    RunConfig rc;
    REQUIRE(parse_args(13, rank, rc, code));
    CHECK(rc.params.at("spec") == "count(w=ab,W=1);count(w=abb,W=1)");
    const char* bad[] = {"qmkit", "qm", "eval", "--g", "a"};
    RunConfig bc;
    CHECK_FALSE(parse_args(5, bad, bc, code));
    CHECK(code == kUsage);
  }
}

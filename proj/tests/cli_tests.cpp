// End-to-end runs of the command-line binary (path injected by the build).
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "helpers.hpp"

using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

RunResult run_cli(const std::string& args) {
  RunResult r;
  std::string cmd = std::string("\"") + AYS_CLI_PATH + "\" " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, got);
  int status = pclose(p);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  REQUIRE(out.good());
}

}  // namespace

TEST_CASE("usage and bad invocations exit 2") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("no-such-command").exit_code == 2);
  CHECK(run_cli("schedule --kind edm").exit_code == 2);  // no --out
  CHECK(run_cli("schedule --kind edm --steps 0 --out /tmp/x.json").exit_code == 2);
}

TEST_CASE("schedule generation writes the file and its manifest") {
  TempDir tmp;
  std::string out = tmp.file("edm10.json");
  RunResult r = run_cli("schedule --kind edm --steps 10 --out " + out);
  CHECK(r.exit_code == 0);

  json s = json::parse(slurp(out));
  CHECK(s["name"] == "edm");
  CHECK(s["sigma_max"] == 80.0);
  CHECK(s["sigma_min"] == 0.002);
  REQUIRE(s["sigmas"].size() == 11);
  CHECK(s["sigmas"][0] == 80.0);

  json man = json::parse(slurp(out + ".manifest.json"));
  CHECK(man["tool"] == "ays");
  CHECK(man["command"] == "schedule");
  REQUIRE(man["outputs"].is_object());
  REQUIRE(man["outputs"].contains(out));
  CHECK(man["outputs"][out].get<std::string>().size() == 16);

  // rerunning produces byte-identical schedule output
  std::string again = tmp.file("edm10b.json");
  CHECK(run_cli("schedule --kind edm --steps 10 --out " + again).exit_code == 0);
  CHECK(slurp(again) == slurp(out));
}

TEST_CASE("schedule validate mode") {
  TempDir tmp;
  std::string good = tmp.file("good.json");
  CHECK(run_cli("schedule --kind logsnr --steps 5 --out " + good).exit_code == 0);
  RunResult ok = run_cli("schedule --input " + good + " --validate");
  CHECK(ok.exit_code == 0);
  CHECK(ok.output.find("valid") != std::string::npos);

  std::string bad = tmp.file("bad.json");
  spit(bad, "{\"name\":\"x\",\"sigma_min\":1.0,\"sigma_max\":3.0,"
            "\"sigmas\":[1.0,2.0,3.0]}");
  CHECK(run_cli("schedule --input " + bad + " --validate").exit_code == 2);

  CHECK(run_cli("schedule --input " + tmp.file("absent.json") + " --validate")
            .exit_code == 2);

  std::string broken = tmp.file("broken.json");
  spit(broken, "not json at all");
  CHECK(run_cli("schedule --input " + broken + " --validate").exit_code == 2);
}

TEST_CASE("schedule transforms from an input file") {
  TempDir tmp;
  std::string base = tmp.file("base.json");
  CHECK(run_cli("schedule --kind edm --steps 5 --out " + base).exit_code == 0);
  std::string dbl = tmp.file("dbl.json");
  CHECK(run_cli("schedule --input " + base + " --subdivide --out " + dbl)
            .exit_code == 0);
  CHECK(json::parse(slurp(dbl))["sigmas"].size() == 11);
  std::string tri = tmp.file("tri.json");
  CHECK(run_cli("schedule --input " + base + " --interpolate 12 --out " + tri)
            .exit_code == 0);
  CHECK(json::parse(slurp(tri))["sigmas"].size() == 13);
}

TEST_CASE("sampling pipeline with manifests and determinism") {
  TempDir tmp;
  std::string model = tmp.file("model.json");
  spit(model, "{\"kind\":\"gaussian\",\"c\":1.0,\"d\":2}");
  std::string sched = tmp.file("s.json");
  CHECK(run_cli("schedule --kind edm --steps 5 --sigma-min 0.01 --sigma-max 10 "
                "--out " + sched).exit_code == 0);

  std::string out = tmp.file("x.csv");
  std::string cmd = "sample --model " + model + " --schedule " + sched +
                    " --solver sde-dpmpp-2m --n 200 --seed 5 --out " + out;
  CHECK(run_cli(cmd).exit_code == 0);

  std::string text = slurp(out);
  int64_t rows = 0;
  for (char ch : text) rows += ch == '\n';
  CHECK(rows == 200);

  json man = json::parse(slurp(out + ".manifest.json"));
  CHECK(man["command"] == "sample");
  CHECK(man["inputs"].size() == 2);
  for (const auto& item : man["inputs"].items())
    CHECK(item.value().get<std::string>().size() == 16);
  CHECK(man["config"]["seed"] == 5);

  // same seed: byte-identical; new seed: different draws
  std::string out2 = tmp.file("y.csv");
  CHECK(run_cli("sample --model " + model + " --schedule " + sched +
                " --solver sde-dpmpp-2m --n 200 --seed 5 --out " + out2)
            .exit_code == 0);
  CHECK(slurp(out2) == text);
  std::string out3 = tmp.file("z.csv");
  CHECK(run_cli("sample --model " + model + " --schedule " + sched +
                " --solver sde-dpmpp-2m --n 200 --seed 6 --out " + out3)
            .exit_code == 0);
  CHECK(slurp(out3) != text);

  // required seed is enforced
  CHECK(run_cli("sample --model " + model + " --schedule " + sched +
                " --solver ddim --n 10 --out " + tmp.file("w.csv"))
            .exit_code == 2);
  // missing model file
  CHECK(run_cli("sample --model " + tmp.file("none.json") + " --schedule " +
                sched + " --solver ddim --n 10 --seed 1 --out " +
                tmp.file("v.csv")).exit_code == 2);
}

TEST_CASE("variance check and trace outputs") {
  TempDir tmp;
  std::string model = tmp.file("model.json");
  spit(model, "{\"kind\":\"gaussian\",\"c\":1.0,\"d\":1}");
  std::string sched = tmp.file("s.json");
  CHECK(run_cli("schedule --kind edm --steps 6 --sigma-min 0.01 --sigma-max 10 "
                "--out " + sched).exit_code == 0);
  std::string out = tmp.file("x.f64");
  std::string trace = tmp.file("trace.csv");
  RunResult r = run_cli("sample --model " + model + " --schedule " + sched +
                        " --solver ddim --n 20000 --seed 2 --from-marginal "
                        "--check-variance --trace " + trace + " --out " + out);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("predicted") != std::string::npos);
  std::string tr = slurp(trace);
  CHECK(tr.rfind("step,sigma_from,sigma_to,mean_abs_x,mean_abs_denoised", 0) == 0);
  // f64 output: 8 bytes per value
  CHECK(slurp(out).size() == 20000u * 8u);
}

TEST_CASE("eval metrics print reports") {
  TempDir tmp;
  std::string model = tmp.file("model.json");
  spit(model, "{\"kind\":\"gaussian\",\"c\":1.0,\"d\":1}");
  std::string sched = tmp.file("s.json");
  CHECK(run_cli("schedule --kind edm --steps 5 --sigma-min 0.01 --sigma-max 10 "
                "--out " + sched).exit_code == 0);
  std::string xs = tmp.file("x.csv");
  CHECK(run_cli("sample --model " + model + " --schedule " + sched +
                " --solver ddim --n 500 --seed 3 --out " + xs).exit_code == 0);

  RunResult nll = run_cli("eval --metric nll --model " + model + " --samples " +
                          xs + " --seed 1");
  CHECK(nll.exit_code == 0);
  CHECK(json::parse(nll.output)["value"].is_number());

  RunResult kl = run_cli("eval --metric gaussian-euler-kl --model " + model +
                         " --schedule " + sched + " --seed 1");
  CHECK(kl.exit_code == 0);
  CHECK(json::parse(kl.output)["kl"].is_number());

  std::string rep = tmp.file("klub.json");
  RunResult kb = run_cli("eval --metric klub --model " + model + " --schedule " +
                         sched + " --n-mc 2000 --pool-size 1024 --seed 1 --out " +
                         rep);
  CHECK(kb.exit_code == 0);
  json parsed = json::parse(slurp(rep));
  CHECK(parsed["value"].is_number());
  CHECK(parsed["std_error"].is_number());

  // nll without samples is an invalid invocation
  CHECK(run_cli("eval --metric nll --model " + model + " --seed 1").exit_code == 2);
}

TEST_CASE("compare emits the summary table") {
  TempDir tmp;
  std::string model = tmp.file("model.json");
  spit(model, "{\"kind\":\"grid\",\"rows\":2,\"cols\":2}");
  std::string dir = tmp.file("cmp");
  RunResult r = run_cli("compare --model " + model +
                        " --schedules edm,logsnr --nfe 4 --n 2000 --seed 1 "
                        "--sigma-min 0.01 --sigma-max 10 --out-dir " + dir);
  CHECK(r.exit_code == 0);
  std::string csv = slurp(dir + "/compare.csv");
  CHECK(csv.rfind("solver,schedule,nfe,nll,std_error", 0) == 0);
  int64_t rows = 0;
  for (char ch : csv) rows += ch == '\n';
  CHECK(rows == 3);  // header + 2 schedules x 1 solver x 1 nfe
  CHECK(r.output.find("solver,schedule,nfe,nll,std_error") != std::string::npos);
  json report = json::parse(slurp(dir + "/report.json"));
  CHECK(report["rows"].size() == 2);
  CHECK(json::parse(slurp(dir + "/manifest.json"))["command"] == "compare");
}

TEST_CASE("optimize writes schedules, report, and manifest") {
  TempDir tmp;
  std::string model = tmp.file("model.json");
  spit(model, "{\"kind\":\"gaussian\",\"c\":1.0,\"d\":1}");
  std::string dir = tmp.file("opt");
  RunResult r = run_cli("optimize --model " + model + " --out-dir " + dir +
                        " --seed 7 --n-mc 256 --pool-size 512 "
                        "--stage1-sweeps 2 --refine-sweeps 1 "
                        "--sigma-min 0.01 --sigma-max 10");
  CHECK(r.exit_code == 0);

  json s10 = json::parse(slurp(dir + "/s10.json"));
  json s20 = json::parse(slurp(dir + "/s20.json"));
  json s40 = json::parse(slurp(dir + "/s40.json"));
  REQUIRE(s10["sigmas"].size() == 11);
  REQUIRE(s20["sigmas"].size() == 21);
  REQUIRE(s40["sigmas"].size() == 41);
  // refinement stages never move inherited points
  for (int i = 0; i <= 10; i++)
    CHECK(s20["sigmas"][2 * i].get<double>() == s10["sigmas"][i].get<double>());

  json rep = json::parse(slurp(dir + "/report.json"));
  CHECK(rep["optimization"]["sweeps"].is_array());
  CHECK(rep["checks"]["even_index_freezing"] == true);
  json man = json::parse(slurp(dir + "/manifest.json"));
  CHECK(man["command"] == "optimize");
  CHECK(man["outputs"].size() >= 4);

  // the output directory doubles as a compare source; a trailing slash must
  // not blank out the schedule label
  std::string cdir = tmp.file("cmp");
  RunResult c = run_cli("compare --model " + model + " --schedules " + dir +
                        "/ --solvers ddim --nfe 10 --n 500 --seed 3 "
                        "--out-dir " + cdir);
  CHECK(c.exit_code == 0);
  std::string csv = slurp(cdir + "/compare.csv");
  CHECK(csv.find("ddim,opt,10,") != std::string::npos);
}

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mnsim/run.hpp"
#include "support/oracles.hpp"

using namespace mnsim;
namespace fs = std::filesystem;
using Catch::Matchers::ContainsSubstring;

namespace {

const char* small_config = R"({
  "grid": {"L": 8, "N": 8},
  "profile": {"shape": "gaussian", "sigma": 1.0, "e": 1.0},
  "model": {"tag": "newton"},
  "initial": {"xi": [0.1, 0.2, 0.3], "v": [0.3, 0, 0],
              "field": {"type": "plane_wave", "n": [0, 1, 0], "pol": [1, 0, 0], "amp": 0.3}},
  "solver": {"t_end": 0.5},
  "output": {"cadence": 0.25}
})";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mnsim_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig small(const fs::path& dir) {
  RunConfig c = parse_config(small_config);
  c.output.directory = dir.string();
  return c;
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config defaults", "[config]") {
  const RunConfig c = parse_config(R"({"grid": {}, "profile": {}, "model": {}})");
  CHECK(c.solver.s == 0.0);
  CHECK(c.solver.eta == 0.9);
  CHECK(c.solver.q == 8);
  CHECK(c.solver.picard_tol == 1e-10);
  CHECK(c.solver.max_iter == 50);
  CHECK(c.grid.N == 32);
  CHECK(c.grid.L == 16.0);
  CHECK(c.initial.admissible);
  // The resolved form parses back to the same thing.
  CHECK(config_to_json(config_from_json(config_to_json(c))) == config_to_json(c));
}

TEST_CASE("config errors name the offending field", "[config]") {
  const std::string base = R"("grid": {"N": 8}, "profile": {}, "model": {})";
  CHECK_THAT(config_error("{" + base + R"(, "solver": {"s": 2}})"), ContainsSubstring("solver.s: s must be < 3/2"));
  CHECK_THAT(config_error(R"({"grid": {"N": 7}, "profile": {}, "model": {}})"), ContainsSubstring("grid.N"));
  CHECK_THAT(config_error("{" + base + R"(, "solver": {"tolerance": 1}})"), ContainsSubstring("solver.tolerance"));
  CHECK_THAT(config_error("{" + base + R"(, "model": {"tag": "dirac"}})"), ContainsSubstring("model"));
  CHECK_THAT(config_error(R"({"grid": {}, "profile": {}})"), ContainsSubstring("model"));
  CHECK_THAT(config_error("{" + base + R"(, "oracle": {"order": 3}})"), ContainsSubstring("oracle.order"));
  CHECK_THAT(config_error("{not json"), ContainsSubstring("malformed"));
  CHECK_THAT(config_error(R"({"grid": {"N": 8}, "profile": {}, "model": {"tag": "abraham"},
                             "initial": {"v": [0.1, 0, 0]}})"),
             ContainsSubstring("initial.v"));
  CHECK_NOTHROW(parse_config(R"({"grid": {"N": 8}, "profile": {}, "model": {}, "solver": {"s": 1.49}})"));
}

TEST_CASE("state files round trip", "[state]") {
  std::mt19937_64 rng(101);
  const Grid g(8.0, 8);
  ParticleState p;
  p.xi = Vec3(0.1, -2.0, 3.5);
  p.v = Vec3(0.2, 0.3, -0.1);
  p.omega = Vec3(1.0, 2.0, 3.0);
  p.m = 2.5;
  p.I = 0.75;
  const SystemState u(EMState(oracle::random_modes(g, rng, 3), oracle::random_modes(g, rng, 3)), p);
  StateFile meta;
  meta.model = ModelKind::rotating;
  meta.s = -0.5;
  meta.time = 1.0 / 3.0;

  const auto buf = encode_state(u, meta);
  CHECK(buf.size() == 132 + g.size() * 6 * 16 + 8);
  const DecodedState d = decode_state(buf);
  CHECK(d.meta.model == ModelKind::rotating);
  CHECK(d.meta.s == -0.5);
  CHECK(d.meta.time == 1.0 / 3.0);
  CHECK(d.state.grid() == g);
  CHECK(d.state.particle.xi == p.xi);
  CHECK(d.state.particle.v == p.v);
  CHECK(d.state.particle.omega == p.omega);
  CHECK(d.state.particle.m == p.m);
  CHECK(d.state.particle.I == p.I);
  bool same = true;
  for (std::size_t i = 0; i < g.size(); ++i) same = same && d.state.em.E[i] == u.em.E[i] && d.state.em.B[i] == u.em.B[i];
  CHECK(same);
  CHECK(encode_state(d.state, d.meta) == buf);

  SECTION("corruption is detected") {
    for (std::size_t at : {std::size_t(40), std::size_t(200), buf.size() - 1}) {
      auto bad = buf;
      bad[at] ^= 0x10;
      CHECK_THROWS_AS(decode_state(bad), FormatError);
    }
    auto bad = buf;
    bad[0] = 'X';
    CHECK_THROWS_WITH(decode_state(bad), ContainsSubstring("magic"));
    CHECK_THROWS_AS(decode_state(std::vector<unsigned char>(buf.begin(), buf.begin() + 100)), FormatError);
  }
  SECTION("files") {
    const fs::path dir = scratch("state");
    write_state_file((dir / "a.mnstate").string(), u, meta);
    CHECK(encode_state(read_state_file((dir / "a.mnstate").string()).state, meta) == buf);
    CHECK_THROWS_AS(read_state_file((dir / "missing.mnstate").string()), FormatError);
  }
}

TEST_CASE("runs write deterministic output", "[run]") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  RunConfig ca = small(a), cb = small(b);
  const RunSummary ra = run(ca, {.quiet = true});
  const RunSummary rb = run(cb, {.quiet = true});
  CHECK(ra.exit_code == 0);
  CHECK(ra.t_final == 0.5);
  CHECK(ra.checkpoints == std::vector<std::string>{"checkpoint_00001.mnstate", "checkpoint_00002.mnstate", "final.mnstate"});
  CHECK(slurp(a / "timeseries.csv") == slurp(b / "timeseries.csv"));
  CHECK(slurp(a / "final.mnstate") == slurp(b / "final.mnstate"));
  // Manifests differ only in the output directory.
  Json ma = Json::parse(slurp(a / "manifest.json")), mb = Json::parse(slurp(b / "manifest.json"));
  ma["config"]["output"]["directory"] = mb["config"]["output"]["directory"];
  CHECK(ma == mb);
  CHECK(ma["summary"]["energy_ok"] == true);
  const RunCheck chk = check_run(a.string());
  CHECK(chk.ok());
  CHECK(chk.rows == ra.nodes);
}

TEST_CASE("zero charge run has constant energy", "[run]") {
  const fs::path dir = scratch("free");
  RunConfig c = small(dir);
  c.profile.e = 0.0;
  const RunSummary r = run(c, {.quiet = true});
  REQUIRE(r.exit_code == 0);
  std::ifstream ts(dir / "timeseries.csv");
  std::string line;
  std::getline(ts, line);
  std::vector<double> energies;
  while (std::getline(ts, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string x; std::getline(ss, x, ',');) cols.push_back(x);
    energies.push_back(std::stod(cols[7]));
  }
  REQUIRE(energies.size() >= 3);
  for (double e : energies) CHECK_THAT(e, Catch::Matchers::WithinRel(energies[0], 1e-13));
}

TEST_CASE("resume from a checkpoint", "[run][resume]") {
  const fs::path one = scratch("one"), first = scratch("first"), second = scratch("second");
  REQUIRE(run(small(one), {.quiet = true}).exit_code == 0);
  RunConfig c1 = small(first);
  c1.solver.t_end = 0.25;
  REQUIRE(run(c1, {.quiet = true}).exit_code == 0);
  const std::string ckpt = (first / "checkpoint_00001.mnstate").string();
  CHECK(read_state_file(ckpt).meta.time == 0.25);

  SECTION("split run matches the single run") {
    const RunSummary r = run(small(second), {.resume = ckpt, .quiet = true});
    CHECK(r.t_start == 0.25);
    const SystemState a = read_state_file((one / "final.mnstate").string()).state;
    const SystemState b = read_state_file((second / "final.mnstate").string()).state;
    CHECK(xs_distance(a, b, 0.0, ModelKind::newton) <= 1e-12);
    const Json m = Json::parse(slurp(second / "manifest.json"));
    CHECK(m["resume"]["time"] == 0.25);
  }
  SECTION("changed grid is rejected") {
    RunConfig c = small(second);
    c.grid.N = 10;
    CHECK_THROWS_WITH(run(c, {.resume = ckpt, .quiet = true}), ContainsSubstring("grid.N"));
    c = small(second);
    c.model.m = 2.0;
    CHECK_THROWS_AS(run(c, {.resume = ckpt, .quiet = true}), ConfigError);
  }
  SECTION("changed tolerance is allowed and recorded") {
    RunConfig c = small(second);
    c.solver.picard_tol = 1e-12;
    CHECK(run(c, {.resume = ckpt, .quiet = true}).exit_code == 0);
    const Json m = Json::parse(slurp(second / "manifest.json"));
    CHECK(m["config"]["solver"]["picard_tol"] == 1e-12);
    CHECK(m["resume"]["checkpoint"] == ckpt);
  }
}

TEST_CASE("overrides", "[run]") {
  RunConfig c = parse_config(small_config);
  RunOptions o;
  o.s = 2.0;
  CHECK_THROWS_AS(apply_overrides(c, o), ConfigError);
  o.s = -0.5;
  o.seed = 7;
  const RunConfig d = apply_overrides(c, o);
  CHECK(d.solver.s == -0.5);
  CHECK(d.initial.field.seed == 7);
}

TEST_CASE("command line", "[cli]") {
  const char* cli = std::getenv("MNSIM_CLI");
  if (!cli) SKIP("MNSIM_CLI not set");
  const fs::path dir = scratch("cli");
  {
    std::ofstream(dir / "cfg.json") << small_config;
    std::ofstream(dir / "bad.json") << R"({"grid": {"N": 7}, "profile": {}, "model": {}})";
  }
  auto sh = [&](const std::string& args) {
    const std::string cmd = std::string(cli) + " " + args + " > " + (dir / "out.txt").string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };
  const std::string cfg = (dir / "cfg.json").string(), out = (dir / "run").string();
  CHECK(sh("norms --config " + cfg) == 0);
  CHECK_THAT(slurp(dir / "out.txt"), ContainsSubstring("M"));
  CHECK(sh("run --config " + cfg + " --out " + out) == 0);
  CHECK_THAT(slurp(dir / "out.txt"), ContainsSubstring("status ok"));
  CHECK(sh("check " + out) == 0);
  CHECK(sh("run --config " + (dir / "bad.json").string()) == 2);
  CHECK_THAT(slurp(dir / "out.txt"), ContainsSubstring("grid.N"));
  CHECK(sh("check " + (dir / "nowhere").string()) == 5);
  CHECK(sh("run --config " + cfg + " --out " + out + " --resume " + out + "/checkpoint_00001.mnstate") == 0);
}

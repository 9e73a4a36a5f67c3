#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crimewave/csv.hpp"
#include "crimewave_cli/cli.hpp"
#include "doctest.h"

namespace fs = std::filesystem;
using namespace crimewave;

namespace {

const fs::path kFixtures = fs::path(CRIMEWAVE_FIXTURE_DIR) / "city";

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "crimewave");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("crimewave_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

/// Synthesizes the fixture city into `dir` and drops the analyze config next to it.
void make_city(const fs::path& dir) {
  const auto r = invoke({"-q", "synth", "-c", (kFixtures / "synth.json").string(), "-o", dir.string()});
  REQUIRE(r.code == 0);
  fs::copy_file(kFixtures / "analyze.json", dir / "analyze.json", fs::copy_options::overwrite_existing);
}

std::vector<std::vector<std::string>> rows(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) out.push_back(split_delimited(line, ','));
  return out;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"analyze"}).code == 2);
  CHECK(invoke({"nosuch", "-c", "x.json"}).code == 2);
  CHECK(invoke({"--help"}).code == 0);
  const auto v = invoke({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find("crimewave") != std::string::npos);
}

TEST_CASE("missing events names the field and writes error.json") {
  const auto dir = scratch("missing");
  spit(dir / "c.json", R"({"weights": "w.csv", "out": "run"})");
  const auto r = invoke({"-q", "analyze", "-c", (dir / "c.json").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("'events'") != std::string::npos);
  const auto err = nlohmann::json::parse(slurp(dir / "run" / "error.json"));
  CHECK(err["error"]["kind"] == "config");
  CHECK(err["error"]["message"].get<std::string>().find("events") != std::string::npos);
}

TEST_CASE("config validation") {
  const auto dir = scratch("validate");
  make_city(dir);
  auto with = [&](const std::string& extra) {
    spit(dir / "c.json", R"({"events": "events.csv", "weights": "weights.csv", "out": "bad", )" + extra + "}");
    return invoke({"-q", "analyze", "-c", (dir / "c.json").string()}).code;
  };
  CHECK(with(R"("bogus": 1)") == 2);
  CHECK(with(R"("p_level": 1.5)") == 2);
  CHECK(with(R"("method": "magic")") == 2);
  CHECK(with(R"("r": 3)") == 2);
  CHECK(with(R"("bands": [[1.1, 0.8]])") == 2);
  CHECK(with(R"("coi_policy": "sometimes")") == 2);
  spit(dir / "c.json", "{not json");
  CHECK(invoke({"-q", "analyze", "-c", (dir / "c.json").string()}).code == 2);
  CHECK(invoke({"-q", "analyze", "-c", (dir / "absent.json").string()}).code == 2);
}

TEST_CASE("no region above phi is an analysis error") {
  const auto dir = scratch("phi");
  make_city(dir);
  spit(dir / "c.json", R"({"events": "events.csv", "weights": "weights.csv", "r": 8, "phi": 1e9, "out": "run"})");
  const auto r = invoke({"-q", "analyze", "-c", (dir / "c.json").string()});
  CHECK(r.code == 1);
  CHECK(fs::exists(dir / "run" / "error.json"));
  CHECK_FALSE(fs::exists(dir / "run" / "manifest.json"));
}

TEST_CASE("citylevel on an empty event file exits with 1") {
  const auto dir = scratch("empty");
  spit(dir / "events.csv", "date,lat,lon\n");
  spit(dir / "c.json", R"({"events": "events.csv", "out": "run"})");
  CHECK(invoke({"-q", "citylevel", "-c", (dir / "c.json").string()}).code == 1);
}

TEST_CASE("analyze writes the documented artifacts and matches the golden spectrum") {
  const auto dir = scratch("golden");
  make_city(dir);
  const auto r = invoke({"-q", "analyze", "-c", (dir / "analyze.json").string()});
  REQUIRE(r.code == 0);
  const auto run = dir / "run";
  for (const char* name : {"partition.json", "sweep.json", "assignment.json", "regions.csv", "global_spectra.csv",
                           "thresholds.json", "composed_spectrum.csv", "composed_band_0.8_1.1.csv", "runs.csv",
                           "fits.json", "summary.json", "manifest.json", "series/region_0.csv"}) {
    CHECK_MESSAGE(fs::exists(run / name), name);
  }
  CHECK_FALSE(fs::exists(run / ".staging"));

  const auto got = rows(slurp(run / "composed_spectrum.csv"));
  const auto want = rows(slurp(kFixtures / "composed_spectrum.golden.csv"));
  REQUIRE(got.size() == want.size());
  CHECK(got[0] == want[0]);
  for (std::size_t i = 1; i < got.size(); ++i) {
    REQUIRE(got[i].size() == 3);
    CHECK(std::abs(std::stod(got[i][0]) - std::stod(want[i][0])) <= 1e-9 * std::stod(want[i][0]));
    CHECK(got[i][1] == want[i][1]);
    CHECK(got[i][2] == want[i][2]);
  }

  // Every file listed in the manifest exists with the recorded size.
  const auto manifest = nlohmann::json::parse(slurp(run / "manifest.json"));
  CHECK(manifest["command"] == "analyze");
  CHECK(manifest["config"]["r_values"] == nlohmann::json({1, 2, 4, 8}));
  for (const auto& f : manifest["files"]) {
    const auto p = run / f["name"].get<std::string>();
    REQUIRE(fs::exists(p));
    CHECK(fs::file_size(p) == f["bytes"].get<std::uintmax_t>());
    CHECK(f["fnv1a"] == cli::hex64(cli::fnv1a(slurp(p))));
  }
  CHECK(manifest["inputs"]["events"]["fnv1a"] == cli::hex64(cli::fnv1a(slurp(dir / "events.csv"))));
}

TEST_CASE("reruns are byte-identical and a seed override changes the Monte-Carlo thresholds") {
  const auto dir = scratch("determinism");
  make_city(dir);
  const auto cfg = (dir / "analyze.json").string();
  REQUIRE(invoke({"-q", "analyze", "-c", cfg, "-o", (dir / "a").string()}).code == 0);
  REQUIRE(invoke({"-q", "analyze", "-c", cfg, "-o", (dir / "b").string()}).code == 0);
  REQUIRE(invoke({"-q", "analyze", "-c", cfg, "-o", (dir / "c").string(), "--seed", "99"}).code == 0);
  for (const char* name : {"global_spectra.csv", "composed_spectrum.csv", "thresholds.json", "manifest.json"}) {
    CHECK_MESSAGE(slurp(dir / "a" / name) == slurp(dir / "b" / name), name);
  }
  CHECK(slurp(dir / "a" / "thresholds.json") != slurp(dir / "c" / "thresholds.json"));
  CHECK(slurp(dir / "a" / "series" / "region_3.csv") == slurp(dir / "c" / "series" / "region_3.csv"));
}

TEST_CASE("the resolved config in the manifest reproduces the run") {
  const auto dir = scratch("roundtrip");
  make_city(dir);
  REQUIRE(invoke({"-q", "analyze", "-c", (dir / "analyze.json").string(), "-o", (dir / "a").string()}).code == 0);
  auto resolved = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"))["config"];
  resolved.erase("command");
  resolved["out"] = "b";
  spit(dir / "resolved.json", resolved.dump());
  REQUIRE(invoke({"-q", "analyze", "-c", (dir / "resolved.json").string()}).code == 0);
  CHECK(slurp(dir / "a" / "global_spectra.csv") == slurp(dir / "b" / "global_spectra.csv"));
  CHECK(slurp(dir / "a" / "manifest.json") == slurp(dir / "b" / "manifest.json"));
}

TEST_CASE("synth is deterministic per seed") {
  const auto a = scratch("synth_a"), b = scratch("synth_b"), c = scratch("synth_c");
  const auto cfg = (kFixtures / "synth.json").string();
  REQUIRE(invoke({"-q", "synth", "-c", cfg, "-o", a.string()}).code == 0);
  REQUIRE(invoke({"-q", "synth", "-c", cfg, "-o", b.string()}).code == 0);
  REQUIRE(invoke({"-q", "synth", "-c", cfg, "-o", c.string(), "--seed", "8"}).code == 0);
  CHECK(slurp(a / "events.csv") == slurp(b / "events.csv"));
  CHECK(slurp(a / "events.csv") != slurp(c / "events.csv"));
  CHECK(slurp(a / "weights.csv") == slurp(c / "weights.csv"));
}

TEST_CASE("a failed run replaces earlier artifacts with error.json") {
  const auto dir = scratch("replace");
  make_city(dir);
  spit(dir / "p.json", R"({"events": "events.csv", "weights": "weights.csv", "r": 4, "out": "run"})");
  REQUIRE(invoke({"-q", "partition", "-c", (dir / "p.json").string()}).code == 0);
  CHECK(fs::exists(dir / "run" / "partition.json"));
  CHECK(nlohmann::json::parse(slurp(dir / "run" / "partition.json")).size() == 4);
  spit(dir / "p.json", R"({"events": "events.csv", "weights": "weights.csv", "r": 5, "out": "run"})");
  CHECK(invoke({"-q", "partition", "-c", (dir / "p.json").string()}).code == 2);
  CHECK_FALSE(fs::exists(dir / "run" / "partition.json"));
  CHECK(fs::exists(dir / "run" / "error.json"));
}

TEST_CASE("installed binary reports exit codes") {
  const char* bin = std::getenv("CRIMEWAVE_BIN");
  if (!bin) return;
  const std::string quiet = " >/dev/null 2>&1";
  CHECK(WEXITSTATUS(std::system((std::string(bin) + " --version" + quiet).c_str())) == 0);
  CHECK(WEXITSTATUS(std::system((std::string(bin) + " analyze" + quiet).c_str())) == 2);
}

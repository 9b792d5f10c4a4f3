/*
   Copyright 2026 The fluxbound Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "fluxbound/cli.hpp"
#include "fluxbound/report.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fluxbound;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_scenario(const std::string& name, const std::string& body) {
  const fs::path p = fs::path(FLUXBOUND_TEST_TMP) / (name + ".cfg");
  fs::create_directories(p.parent_path());
  std::ofstream(p) << body;
  return p;
}

const char* kQuick = R"([scenario]
name = quick
[geometry]
shape = ball
inner_radius_length = 1
[probes]
gammas_ratio = 2, 4
angles_rad = 0.5
[montecarlo]
crosscheck_samples_count = 2000
)";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with 2") {
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"verify"}).code == 2);
    CHECK(run({"bounds", "--d", "2"}).code == 2);
    CHECK(run({"bounds", "--gamma", "0.5"}).code == 2);
    const Run missing = run({"verify", "--scenario", "/nonexistent/x.cfg"});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("/nonexistent/x.cfg") != std::string::npos);
    const fs::path bad = write_scenario("bad", "[scenario]\nname = b\n");
    const Run r = run({"verify", "--scenario", bad.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("geometry.shape") != std::string::npos);
  }

  TEST_CASE("bounds prints the constants") {
    const Run r = run({"bounds", "--d", "3", "--gamma", "10"});
    CHECK(r.code == 0);
    CHECK(r.out.find("10.000000,3.162278,0.633") != std::string::npos);
    CHECK(r.out.find(",2.138") != std::string::npos);
  }

  TEST_CASE("verify twice with the same seed writes identical files") {
    const fs::path cfg = write_scenario("quick", kQuick);
    const fs::path a = fs::path(FLUXBOUND_TEST_TMP) / "cli_a";
    const fs::path b = fs::path(FLUXBOUND_TEST_TMP) / "cli_b";
    fs::remove_all(a);
    fs::remove_all(b);
    const Run ra = run({"verify", "--scenario", cfg.string(), "--seed", "7", "--out", a.string()});
    const Run rb = run({"verify", "--scenario", cfg.string(), "--seed", "7", "--out", b.string()});
    CHECK(ra.code == 0);
    CHECK(rb.code == 0);
    for (const char* f : {"bounds.csv", "envelope.svg"}) CHECK(slurp(a / "quick" / f) == slurp(b / "quick" / f));
    const auto ma = reproducible_part(load_manifest((a / "quick" / "manifest.json").string()));
    const auto mb = reproducible_part(load_manifest((b / "quick" / "manifest.json").string()));
    CHECK(ma == mb);
    CHECK(ma["seeds"]["montecarlo"] == 7);

    const fs::path c = fs::path(FLUXBOUND_TEST_TMP) / "cli_c";
    fs::remove_all(c);
    const Run rr = run({"report", "--from", (a / "quick").string(), "--out", c.string()});
    CHECK(rr.code == 0);
    for (const char* f : {"bounds.csv", "envelope.svg", "manifest.json"}) {
      CHECK(slurp(a / "quick" / f) == slurp(c / "quick" / f));
    }
  }

  TEST_CASE("solve and mc subcommands") {
    const fs::path cfg = write_scenario("quick", kQuick);
    const fs::path out = fs::path(FLUXBOUND_TEST_TMP) / "cli_solve";
    fs::remove_all(out);
    CHECK(run({"solve", "--scenario", cfg.string(), "--out", out.string()}).code == 0);
    CHECK(fs::exists(out / "quick" / "solve.csv"));
    CHECK(fs::exists(out / "quick" / "manifest.json"));
    const Run m = run({"mc", "--scenario", cfg.string(), "--out", out.string(), "--dump-paths", "2"});
    CHECK(m.code == 0);
    CHECK(fs::exists(out / "quick" / "paths.txt"));
  }
}

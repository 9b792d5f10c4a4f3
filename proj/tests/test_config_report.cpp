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

#include "fluxbound/config.hpp"
#include "fluxbound/report.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fluxbound;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(
[scenario]
name = tiny
[geometry]
shape = ball
inner_radius_length = 2
)";

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("minimal file fills defaults") {
    const ScenarioConfig c = parse_scenario(kMinimal);
    CHECK(c.name == "tiny");
    CHECK(c.inner_radius == 2.0);
    CHECK(c.bounding_radius == 2.0);
    CHECK(c.dimension == 3);
    CHECK(c.gammas == std::vector<double>{2.0, 4.0, 10.0});
  }

  TEST_CASE("canonical text round trips") {
    ScenarioConfig c = parse_scenario(kMinimal);
    c.mc.dt = 0.1 + 0.2;
    c.gammas = {1.1, 3.0000000000000004};
    c.suites = {"theorem1", "hitting"};
    const std::string text = format_scenario(c);
    const ScenarioConfig d = parse_scenario(text);
    CHECK(format_scenario(d) == text);
    CHECK(d.mc.dt == c.mc.dt);
    CHECK(d.gammas == c.gammas);
    CHECK(fnv1a(text) == fnv1a(format_scenario(d)));
  }

  TEST_CASE("errors name the key") {
    auto message = [](const std::string& text) {
      try {
        parse_scenario(text);
      } catch (const ConfigError& e) {
        return std::string(e.what());
      }
      return std::string();
    };
    CHECK(message("[scenario]\nname = a\n").find("geometry.shape") != std::string::npos);
    CHECK(message("[scenario]\nname = a\n[geometry]\nshape = ball\n").find("geometry.inner_radius_length") !=
          std::string::npos);
    CHECK(message(std::string(kMinimal) + "radius = 3\n").find("geometry.radius") != std::string::npos);
    CHECK(message(std::string(kMinimal) + "[montecarlo]\ndt_time = fast\n").find("montecarlo.dt_time") !=
          std::string::npos);
    CHECK(message(std::string(kMinimal) + "[bogus]\nx = 1\n").find("bogus") != std::string::npos);
    CHECK(message("[scenario\nname = a\n").find("malformed") != std::string::npos);
    CHECK(message("[scenario]\nname = a\n[geometry]\nshape = shell\ninner_radius_length = 1\n")
              .find("geometry.outer_radius_length") != std::string::npos);
  }

  TEST_CASE("FNV-1a reference values") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(hex64(0xabcULL) == "0000000000000abc");
  }

  TEST_CASE("shipped scenarios parse") {
    for (const char* f : {"radial", "shell", "punctured", "qbump", "blowup", "hitting"}) {
      CHECK_NOTHROW(load_scenario(std::string(FLUXBOUND_SCENARIO_DIR) + "/" + f + ".cfg"));
    }
  }
}

TEST_SUITE("report") {
  TEST_CASE("empty scenario list is an error and writes nothing") {
    const fs::path dir = fs::path(FLUXBOUND_TEST_TMP) / "report_empty";
    fs::remove_all(dir);
    CHECK_THROWS_AS(emit_report({}, dir.string()), InvalidInput);
    CHECK_FALSE(fs::exists(dir));
  }

  TEST_CASE("single radial scenario gives three files and regenerates identically") {
    ScenarioConfig c = parse_scenario(kMinimal);
    c.inner_radius = c.bounding_radius = 1.0;
    c.name = "radial";
    c.mc_crosscheck = false;
    const ScenarioResults r = run_suites(c);
    CHECK(r.all_pass());
    const nlohmann::json m = make_manifest(r, {"verify", 1, 1.25});
    const fs::path dir = fs::path(FLUXBOUND_TEST_TMP) / "report_single";
    fs::remove_all(dir);
    const auto files = emit_report({m}, dir.string());
    CHECK(files.size() == 3);
    for (const char* f : {"bounds.csv", "envelope.svg", "manifest.json"}) CHECK(fs::exists(dir / "radial" / f));

    const nlohmann::json back = load_manifest((dir / "radial" / "manifest.json").string());
    CHECK(back == m);
    const fs::path again = fs::path(FLUXBOUND_TEST_TMP) / "report_again";
    fs::remove_all(again);
    emit_report({back}, again.string());
    for (const char* f : {"bounds.csv", "envelope.svg", "manifest.json"}) {
      std::ifstream a(dir / "radial" / f), b(again / "radial" / f);
      std::stringstream sa, sb;
      sa << a.rdbuf();
      sb << b.rdbuf();
      CHECK(sa.str() == sb.str());
    }
    CHECK(reproducible_part(m).contains("wall_time_s") == false);
  }

  TEST_CASE("unwritable output directory") {
    ScenarioConfig c = parse_scenario(kMinimal);
    c.inner_radius = c.bounding_radius = 1.0;
    c.mc_crosscheck = false;
    c.gammas = {2.0};
    const nlohmann::json m = make_manifest(run_suites(c), {"verify", 1, 0.0});
    const fs::path blocker = fs::path(FLUXBOUND_TEST_TMP) / "blocker";
    fs::create_directories(blocker.parent_path());
    std::ofstream(blocker) << "x";
    CHECK_THROWS_AS(emit_report({m}, (blocker / "sub").string()), std::runtime_error);
  }
}

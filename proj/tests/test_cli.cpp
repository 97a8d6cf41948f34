#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "xbridge/json_io.hpp"

namespace fs = std::filesystem;
using namespace xbridge;

namespace {

int run(const std::string& args) {
  std::string cmd = std::string(XBRIDGE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("full run over a small simulated scenario") {
    auto dir = fresh_dir("xbridge_cli_ok");
    write(dir / "config.json", R"({"simulator": {"seed": 3, "n_transfers": 200, "decoy_field_rate": 0.5},
                                  "sweep": {"timewindows": [60, 7200], "fee_rates": [0.1, 0.2]}})");
    std::string common = "--config " + (dir / "config.json").string() + " --out " + dir.string();
    for (const char* cmd : {"simulate", "decode", "categorize", "infer", "examine", "pair", "evaluate", "sweep"}) {
      CHECK_MESSAGE(run(std::string(cmd) + " " + common) == 0, cmd);
    }
    for (const char* file : {"source.jsonl", "categories_source.jsonl", "candidates.json", "quintuples.json",
                             "pairs.jsonl", "metrics.json", "sweep.csv", "decode_diagnostics.txt"}) {
      CHECK_MESSAGE(fs::exists(dir / file), file);
    }
    auto metrics = read_json_file(dir / "metrics.json");
    CHECK(metrics["pipeline"]["f1"].get<double>() == doctest::Approx(1.0));
    CHECK(read_json_lines(dir / "pairs.jsonl").size() == 200);
    fs::remove_all(dir);
  }

  TEST_CASE("configuration problems exit with 2") {
    auto dir = fresh_dir("xbridge_cli_cfg");
    CHECK(run("frobnicate --out " + dir.string()) == 2);
    CHECK(run("--out " + dir.string()) == 2);
    write(dir / "broken.json", "{ not json");
    CHECK(run("simulate --config " + (dir / "broken.json").string() + " --out " + dir.string()) == 2);
    write(dir / "range.json", R"({"simulator": {"decoy_field_rate": 2.0}})");
    CHECK(run("simulate --config " + (dir / "range.json").string() + " --out " + dir.string()) == 2);
    write(dir / "provider.json", R"({"provider": {"kind": "oracle"}})");
    CHECK(run("simulate --config " + (dir / "provider.json").string() + " --out " + dir.string()) == 0);
    CHECK(run("infer --config " + (dir / "provider.json").string() + " --out " + dir.string()) == 2);
    write(dir / "params.json", R"({"params": {"fee_rate": 7}})");
    CHECK(run("pair --config " + (dir / "params.json").string() + " --out " + dir.string()) == 2);
    CHECK(run("simulate --config " + (dir / "missing.json").string() + " --out " + dir.string()) == 2);
    fs::remove_all(dir);
  }

  TEST_CASE("data problems exit with 3") {
    auto dir = fresh_dir("xbridge_cli_data");
    CHECK(run("decode --out " + dir.string()) == 3);
    CHECK(run("categorize --out " + dir.string()) == 3);
    write(dir / "source.jsonl", "{\"chain\": 1}\n{ truncated");
    write(dir / "destination.jsonl", "");
    CHECK(run("categorize --out " + dir.string()) == 3);
    fs::remove_all(dir);
  }
}

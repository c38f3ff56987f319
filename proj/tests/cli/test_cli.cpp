#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(MICHELL_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path work() {
  static const fs::path dir = [] {
    fs::path d = CLI_WORK_DIR;
    fs::remove_all(d);
    fs::create_directories(d);
    const std::string cmd =
        std::string(MICHELL_FIXTURES) + " --dir " + d.string() + " cube > /dev/null";
    REQUIRE(std::system(cmd.c_str()) == 0);
    return d;
  }();
  return dir;
}

} // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run("") == 2);
  CHECK(run("--config x.json --stage nope") == 2);
  CHECK(run("--version") == 0);
}

TEST_CASE("config errors exit with 2") {
  CHECK(run("--config " + (work() / "absent.json").string()) == 2);
  std::ofstream(work() / "bad.json") << "{\"mesh\": 3}";
  CHECK(run("--config " + (work() / "bad.json").string()) == 2);
}

TEST_CASE("missing artifacts exit with 4") {
  const auto cfg = (work() / "cube.json").string();
  CHECK(run("--config " + cfg + " --stage extract --out " + (work() / "empty").string()) == 4);
}

TEST_CASE("numerical failures exit with 3") {
  // Same mesh, no loads: the stress field is identically zero.
  std::ifstream in(work() / "cube.json");
  std::string text((std::istreambuf_iterator<char>(in)), {});
  const auto at = text.find("\"neumann\"");
  REQUIRE(at != std::string::npos);
  const auto open = text.find('[', at);
  int depth = 0;
  std::size_t close = open;
  for (; close < text.size(); ++close) {
    depth += text[close] == '[';
    depth -= text[close] == ']';
    if (depth == 0)
      break;
  }
  text.replace(open, close - open + 1, "[]");
  std::ofstream(work() / "unloaded.json") << text;
  CHECK(run("--config " + (work() / "unloaded.json").string() + " --stage fea --out " +
            (work() / "unloaded").string()) == 3);
}

TEST_CASE("stages run in sequence from the command line") {
  const auto cfg = (work() / "cube.json").string();
  const auto out = (work() / "staged").string();
  for (const char* s : {"fea", "frames", "param", "extract", "simplify", "geometry", "verify"})
    CHECK(run("--config " + cfg + " --stage " + s + " --out " + out) == 0);
  CHECK(fs::exists(fs::path(out) / "verify_report.json"));
  CHECK(fs::exists(fs::path(out) / "verify.log"));
}

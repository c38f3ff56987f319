// Writes the bundled fixture meshes and configs.
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "michell/michell.h"

int main(int argc, char** argv) {
  CLI::App app{"Write fixture meshes and pipeline configs"};
  std::string dir = "fixtures";
  std::vector<std::string> names = {"uniaxial_bar", "bending_bar", "cube"};
  app.add_option("--dir", dir, "destination directory");
  app.add_option("names", names, "fixtures to write");
  CLI11_PARSE(app, argc, argv);
  for (const auto& n : names) {
    if (mt_write_fixture(n.c_str(), dir.c_str()) != MT_OK) {
      std::fprintf(stderr, "error: %s\n", mt_last_error());
      return 2;
    }
    std::printf("%s/%s.json\n", dir.c_str(), n.c_str());
  }
  return 0;
}

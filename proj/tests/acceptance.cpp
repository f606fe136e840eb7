#include <cstdio>
#include <fstream>

#include "CLI11.hpp"

#include "gplab/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks, one line per criterion"};
  std::vector<int> only;
  std::string json_path;
  app.add_option("--only", only, "Criteria to run (default all)")->check(CLI::Range(1, gplab::AcceptanceSuite::kCount));
  app.add_option("--json", json_path, "Write the detailed results here");
  CLI11_PARSE(app, argc, argv);
  if (only.empty())
    for (int i = 1; i <= gplab::AcceptanceSuite::kCount; ++i) only.push_back(i);

  gplab::AcceptanceSuite suite;
  nlohmann::json report = nlohmann::json::array();
  int failed = 0;
  for (int id : only) {
    const auto r = suite.run(id);
    std::printf("[%s] %2d %s (%.1f s): %s\n", r.pass ? "PASS" : "FAIL", r.id, r.title.c_str(), r.seconds,
                r.summary.c_str());
    std::fflush(stdout);
    failed += !r.pass;
    report.push_back({{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"seconds", r.seconds},
                      {"summary", r.summary}, {"data", r.data}});
  }
  if (!json_path.empty()) std::ofstream(json_path) << report.dump(2) << '\n';
  std::printf("%zu/%zu criteria passed\n", only.size() - failed, only.size());
  return failed ? 1 : 0;
}

// nflib must compile against the public state API only: no driver code.
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <set>

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kAllowed = {
    "flexstate/api.hpp",   "flexstate/cache.hpp", "flexstate/error.hpp",   "flexstate/key.hpp",
    "flexstate/mutation.hpp", "flexstate/packet.hpp", "flexstate/runtime.hpp", "flexstate/store.hpp",
    "flexstate/types.hpp",
};

std::vector<fs::path> nflib_files() {
  const fs::path root = FLEXSTATE_SOURCE_DIR;
  std::vector<fs::path> out;
  for (const auto& dir : {root / "core/include/flexstate/nf", root / "core/src/nf"}) {
    for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path());
  }
  return out;
}

}  // namespace

TEST(NflibLint, IncludesOnlyCoreApi) {
  const std::regex include_re(R"re(^\s*#\s*include\s*[<"]([^>"]+)[>"])re");
  const auto files = nflib_files();
  ASSERT_GE(files.size(), 8u);
  for (const auto& path : files) {
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      std::smatch m;
      if (!std::regex_search(line, m, include_re)) continue;
      const std::string inc = m[1];
      if (inc.rfind("flexstate/", 0) != 0) continue;  // standard and third-party headers
      if (inc.rfind("flexstate/nf/", 0) == 0) continue;
      EXPECT_TRUE(kAllowed.count(inc)) << path << " includes " << inc;
    }
  }
}

TEST(NflibLint, NoDriverIdentifiers) {
  const std::regex banned(R"(\b(flatkvs|tablestore|resp|RespDriver|FlatKvsDriver|TableStoreDriver|MiniRespServer|drivers/)\b)",
                          std::regex::icase);
  for (const auto& path : nflib_files()) {
    std::ifstream in(path);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
      ++n;
      EXPECT_FALSE(std::regex_search(line, banned)) << path << ":" << n << ": " << line;
    }
  }
}

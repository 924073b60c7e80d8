#pragma once

// Scratch-directory and process helpers shared by the io tests and the
// acceptance runner.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace support {

// fresh directory under the build tree; wiped on entry so reruns are clean
inline std::string scratch_dir(const std::string& name) {
  std::filesystem::path p = std::filesystem::path(CHPPI_TEST_TMP) / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// relative path -> bytes for every regular file under root
inline std::map<std::string, std::string> dir_contents(const std::string& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root))
    if (e.is_regular_file())
      out[std::filesystem::relative(e.path(), root).string()] = slurp(e.path().string());
  return out;
}

// run the installed CLI; returns the process exit code (-1 if it died oddly)
inline int run_cli(const std::string& args) {
  std::string cmd = std::string(CHPPI_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  if (WIFEXITED(rc)) return WEXITSTATUS(rc);
  return -1;
}

}  // namespace support

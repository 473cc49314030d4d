#pragma once

// Helpers for driving the command-line binary from tests.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace cli {

namespace fs = std::filesystem;

#ifndef AHCR_CLI_PATH
#error "AHCR_CLI_PATH must be defined to the ahcr binary path"
#endif

inline const char* binary() { return AHCR_CLI_PATH; }

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

inline CommandResult run(const std::string& args, const fs::path& capture_dir) {
  fs::create_directories(capture_dir);
  static int counter = 0;
  const fs::path out_file =
      capture_dir / ("cmd_out_" + std::to_string(counter++) + ".txt");
  const std::string cmd = std::string(binary()) + " " + args + " > " +
                          out_file.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  CommandResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  result.output = ss.str();
  return result;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

inline bool same_bytes(const fs::path& a, const fs::path& b) {
  return read_file(a) == read_file(b);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           (tag + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string str(const std::string& name) const {
    return (path / name).string();
  }
  static inline int counter = 0;
};

/// Pulls the value of `field,...\nhead,<crr>,<ecr>` summaries.
inline double summary_crr(const fs::path& summary_csv) {
  const std::string content = read_file(summary_csv);
  const auto newline = content.find('\n');
  const auto first_comma = content.find(',', newline + 1);
  const auto second_comma = content.find(',', first_comma + 1);
  return std::stod(content.substr(first_comma + 1,
                                  second_comma - first_comma - 1));
}

}  // namespace cli

#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace plancritic::detail {

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string output;  // stdout and stderr interleaved
};

// Runs argv[0] with a hard deadline. On timeout the whole process group is
// killed and reaped before returning. Throws std::system_error when the
// process cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, std::chrono::milliseconds timeout,
                          const std::filesystem::path& working_directory = {});

// Temporary file removed on destruction.
class TempFile {
 public:
  TempFile(const std::string& stem, const std::string& suffix, const std::string& contents);
  ~TempFile();
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace plancritic::detail

#pragma once

#include "affectsense/time_util.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace testing {

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("affectsense_" + tag + "_" + std::to_string(rd()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

/// Epoch ms of a local wall-clock time.
inline std::int64_t at(const char* date, int h, int m = 0, int s = 0, affectsense::TzOffset tz = {}) {
    return affectsense::day_start_ms(affectsense::parse_date(date), tz) + ((h * 60LL + m) * 60 + s) * 1000;
}

} // namespace testing

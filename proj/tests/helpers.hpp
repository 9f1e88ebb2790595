#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "cwl/error.hpp"

namespace testing {

// Fresh directory under the build tree's temp area.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cwl_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

template <typename F>
std::string error_code_of(F&& f) {
  try {
    f();
  } catch (const cwl::Error& e) {
    return e.code();
  }
  return "";
}

template <typename F>
std::string error_message_of(F&& f) {
  try {
    f();
  } catch (const cwl::Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace testing

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cwl/cascade.hpp"
#include "cwl/pipeline.hpp"
#include "cwl/synth.hpp"

namespace cwl {

// Flat key=value settings. Precedence: explicit set() calls (command line)
// over the config file over the defaults below.
struct RunConfig {
  std::uint64_t seed = 7;
  int subjects = 5;
  std::filesystem::path out = "out";
  std::filesystem::path sessions_dir;  // default <out>/sessions
  std::filesystem::path features_dir;  // default <out>/features
  std::filesystem::path surgtlx_path;  // default <sessions_dir>/surgtlx.csv
  std::filesystem::path scalograms_dir;  // default <out>/scalograms

  SynthConfig synth;
  PreprocessConfig preprocess;
  std::optional<std::uint64_t> impute_seed;  // derived from seed when unset
  CascadeConfig cascade;
  int repeats = 5;
  std::string models = "tl,cnn1d,elm,melm";
  double epoch_pre_s = 5.0;
  double epoch_post_s = 30.0;
  double rating_max = 20.0;
  int dump_count = 8;

  // Throws UnknownKey for keys outside the table and InvalidConfig for
  // values that do not parse.
  void set(const std::string& key, const std::string& value);
  // Lines of key = value; '#' starts a comment.
  void load_file(const std::filesystem::path& path);
  // Resolved settings in the file format, one key per line, sorted.
  std::string to_text() const;
  static std::vector<std::string> keys();

  std::filesystem::path sessions() const;
  std::filesystem::path features() const;
  std::filesystem::path surgtlx() const;
  std::filesystem::path scalograms() const;
  std::string subject_id(int index) const;  // S01, S02, ...
  SynthConfig synth_for(int index) const;
  PreprocessConfig preprocess_config() const;
  CascadeConfig cascade_config() const;
};

}  // namespace cwl

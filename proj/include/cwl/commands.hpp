#pragma once

#include <functional>
#include <string>

#include "cwl/config.hpp"

namespace cwl {

using LineSink = std::function<void(const std::string&)>;

// <sessions>/Snn session directories plus <sessions>/surgtlx.csv.
void cmd_generate(const RunConfig& cfg, const LineSink& log = {});
// <features>/Snn.csv for every session directory, stage order in
// <features>/preprocess_log.txt.
void cmd_preprocess(const RunConfig& cfg, const LineSink& log = {});
// <out>/report: experiment reports, last-repeat checkpoints, resolved config.
// The in-memory report is moved to *report when given.
void cmd_train_eval(const RunConfig& cfg, const LineSink& log = {}, ExperimentReport* report = nullptr);
// <out>/study: surgtlx_scores.csv and hemo_summary.csv.
void cmd_study(const RunConfig& cfg, const LineSink& log = {});
// PGM images <subject>_<t_start_ms>_<label>.pgm of evenly spaced windows per
// subject, into <out>/scalograms unless scalograms_dir is set.
void cmd_dump_scalograms(const RunConfig& cfg, const LineSink& log = {});

}  // namespace cwl

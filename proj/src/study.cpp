#include "cwl/study.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "cwl/csv.hpp"
#include "cwl/error.hpp"

namespace cwl {

namespace {
constexpr std::array<std::string_view, kTlxDimensions> kCodes = {"MD", "PD", "TD",
                                                                 "TC", "SS", "DI"};
}

std::string_view tlx_code(TlxDimension d) { return kCodes[static_cast<int>(d)]; }

TlxDimension parse_tlx_code(std::string_view code) {
  for (int i = 0; i < kTlxDimensions; ++i) {
    if (kCodes[i] == code) return static_cast<TlxDimension>(i);
  }
  throw Error("InvalidPair", "unknown SURG-TLX dimension '" + std::string(code) + "'");
}

PairChoice parse_pair_choice(std::string_view cell) {
  if (cell.empty()) throw Error("MissingPair", "empty pairwise entry");
  const auto gt = cell.find('>');
  if (gt == std::string_view::npos) {
    throw Error("InvalidPair", "pairwise entry '" + std::string(cell) + "' is not winner>loser");
  }
  PairChoice p{parse_tlx_code(cell.substr(0, gt)), parse_tlx_code(cell.substr(gt + 1))};
  if (p.winner == p.loser) {
    throw Error("InvalidPair", "pairwise entry '" + std::string(cell) + "' compares a dimension with itself");
  }
  return p;
}

SurgTlxScore surgtlx_score(const SurgTlxResponse& r) {
  for (int d = 0; d < kTlxDimensions; ++d) {
    if (!(r.ratings[d] >= 0.0) || !(r.ratings[d] <= r.rating_max)) {
      throw Error("RatingOutOfRange", std::string(kCodes[d]) + " rating " +
                                          csv::format(r.ratings[d]) + " outside [0, " +
                                          csv::format(r.rating_max) + "]");
    }
  }
  std::set<std::pair<int, int>> seen;
  SurgTlxScore s;
  for (const PairChoice& p : r.pairwise) {
    const int a = static_cast<int>(p.winner);
    const int b = static_cast<int>(p.loser);
    if (a == b) throw Error("InvalidPair", "pair compares a dimension with itself");
    if (!seen.insert({std::min(a, b), std::max(a, b)}).second) {
      throw Error("DuplicatePair", "pair " + std::string(kCodes[std::min(a, b)]) + "/" +
                                       std::string(kCodes[std::max(a, b)]) + " appears twice");
    }
    ++s.weights[a];
  }
  if (seen.size() != kTlxPairs) {
    throw Error("MissingPair", std::to_string(kTlxPairs - seen.size()) +
                                   " of 15 dimension pairs are missing");
  }
  double weighted = 0.0;
  double total = 0.0;
  for (int d = 0; d < kTlxDimensions; ++d) {
    weighted += r.ratings[d] * s.weights[d];
    total += r.ratings[d];
  }
  s.weighted_score = weighted / kTlxPairs;
  s.raw_mean = total / kTlxDimensions;
  return s;
}

std::vector<SurgTlxRow> read_surgtlx_csv(const std::filesystem::path& path) {
  std::vector<SurgTlxRow> rows;
  bool header = true;
  csv::for_each_row(path, [&](std::size_t row, std::span<const std::string_view> cells) {
    if (header) {
      if (cells.size() != 2 + kTlxDimensions + kTlxPairs || cells[0] != "participant") {
        throw Error("MalformedCsv", path.string() + ": expected participant,task,6 ratings,15 pairs");
      }
      header = false;
      return;
    }
    const std::string where = path.string() + ": row " + std::to_string(row) + ": ";
    try {
      SurgTlxRow r;
      r.participant = std::string(cells[0]);
      r.task = std::string(cells[1]);
      for (int d = 0; d < kTlxDimensions; ++d) {
        auto v = csv::parse_cell(cells[2 + d], path, row);
        if (!v) throw Error("MalformedCsv", "empty rating");
        r.response.ratings[d] = *v;
      }
      for (int p = 0; p < kTlxPairs; ++p) {
        const auto cell = cells[2 + kTlxDimensions + p];
        if (cell.empty()) continue;  // reported as MissingPair by validation
        r.response.pairwise.push_back(parse_pair_choice(cell));
      }
      surgtlx_score(r.response);
      rows.push_back(std::move(r));
    } catch (const Error& e) {
      throw Error(e.code(), where + e.what());
    }
  });
  return rows;
}

void write_surgtlx_csv(const std::vector<SurgTlxRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IoError", "cannot write " + path.string());
  out << "participant,task";
  for (auto c : kCodes) out << ',' << c;
  for (int p = 1; p <= kTlxPairs; ++p) out << ",p" << p;
  out << '\n';
  for (const auto& r : rows) {
    out << r.participant << ',' << r.task;
    for (double v : r.response.ratings) out << ',' << csv::format(v);
    for (int p = 0; p < kTlxPairs; ++p) {
      out << ',';
      if (static_cast<std::size_t>(p) < r.response.pairwise.size()) {
        const PairChoice& c = r.response.pairwise[p];
        out << tlx_code(c.winner) << '>' << tlx_code(c.loser);
      }
    }
    out << '\n';
  }
}

void write_surgtlx_scores(const std::vector<SurgTlxRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IoError", "cannot write " + path.string());
  out << "participant,task";
  for (auto c : kCodes) out << ",w_" << c;
  out << ",weighted_score,raw_mean\n";
  for (const auto& r : rows) {
    const SurgTlxScore s = surgtlx_score(r.response);
    out << r.participant << ',' << r.task;
    for (int w : s.weights) out << ',' << w;
    out << ',' << csv::format(s.weighted_score) << ',' << csv::format(s.raw_mean) << '\n';
  }
}

// ---------------------------------------------------------------------------

EpochAverage epoch_average(const MultimodalRecording& rec, double pre_s, double post_s,
                           const std::vector<TaskLabel>& tasks) {
  if (!(pre_s >= 0.0) || !(post_s >= 0.0) || pre_s + post_s <= 0.0) {
    throw Error("InvalidConfig", "epoch bounds must be >= 0 and span a positive duration");
  }
  if (rec.events.intervals.empty()) throw Error("NoEpochs", "recording has no events");
  if (rec.fnirs_hbo2.empty()) throw Error("InvalidStream", "recording has no fNIRS channels");
  const double fs = rec.fnirs_hbo2.front().fs_hz;

  std::vector<TaskLabel> wanted = tasks;
  if (wanted.empty()) {
    for (const auto& iv : rec.events.intervals) {
      if (iv.label != TaskLabel::NoTask &&
          std::find(wanted.begin(), wanted.end(), iv.label) == wanted.end()) {
        wanted.push_back(iv.label);
      }
    }
    std::sort(wanted.begin(), wanted.end());
    if (wanted.empty()) throw Error("NoEpochs", "schedule contains no task intervals");
  }

  EpochAverage ea;
  ea.fs_hz = fs;
  ea.pre_s = pre_s;
  ea.post_s = post_s;
  ea.length = static_cast<std::size_t>(std::llround((pre_s + post_s) * fs));
  const auto n_pre = static_cast<std::size_t>(std::llround(pre_s * fs));
  for (const auto& ch : rec.fnirs_hbo2) ea.channel_names.push_back(ch.name);

  const std::size_t n = rec.fnirs_hbo2.front().size();
  for (TaskLabel task : wanted) {
    std::vector<std::size_t> starts;
    std::size_t dropped = 0;
    for (const auto& iv : rec.events.intervals) {
      if (iv.label != task) continue;
      const long long start = std::llround((iv.start_s - pre_s) * fs);
      if (start < 0 || static_cast<std::size_t>(start) + ea.length > n) {
        ++dropped;
        continue;
      }
      starts.push_back(static_cast<std::size_t>(start));
    }
    if (starts.empty()) {
      throw Error("NoEpochs", std::string(to_string(task)) + " has no usable epochs");
    }
    auto average = [&](const std::vector<ChannelStream>& group) {
      std::vector<std::vector<double>> out(group.size(), std::vector<double>(ea.length, 0.0));
      for (std::size_t c = 0; c < group.size(); ++c) {
        for (std::size_t s0 : starts) {
          const double* x = group[c].samples.data() + s0;
          // Shifted mean: exact for a constant pre-onset span.
          double baseline = 0.0;
          if (n_pre > 0) {
            for (std::size_t i = 0; i < n_pre; ++i) baseline += x[i] - x[0];
            baseline = x[0] + baseline / static_cast<double>(n_pre);
          }
          for (std::size_t i = 0; i < ea.length; ++i) out[c][i] += x[i] - baseline;
        }
        for (double& v : out[c]) v /= static_cast<double>(starts.size());
      }
      return out;
    };
    ea.hbo2[task] = average(rec.fnirs_hbo2);
    ea.hbr[task] = average(rec.fnirs_hbr);
    ea.epoch_count[task] = starts.size();
    ea.dropped_count[task] = dropped;
  }
  return ea;
}

EpochAverage combine_subjects(const std::vector<EpochAverage>& per_subject) {
  if (per_subject.empty()) throw Error("NoEpochs", "no subjects to combine");
  EpochAverage out = per_subject.front();
  const double scale = 1.0 / static_cast<double>(per_subject.size());
  auto accumulate = [&](auto member) {
    for (auto& [task, channels] : out.*member) {
      for (auto& ch : channels) std::fill(ch.begin(), ch.end(), 0.0);
      for (const auto& s : per_subject) {
        if (s.length != out.length || s.channel_names.size() != out.channel_names.size()) {
          throw Error("ShapeMismatch", "subject epoch layouts differ");
        }
        auto it = (s.*member).find(task);
        if (it == (s.*member).end()) throw Error("NoEpochs", "subject lacks a task average");
        for (std::size_t c = 0; c < channels.size(); ++c) {
          for (std::size_t i = 0; i < out.length; ++i) channels[c][i] += scale * it->second[c][i];
        }
      }
    }
  };
  accumulate(&EpochAverage::hbo2);
  accumulate(&EpochAverage::hbr);
  for (auto& [task, count] : out.epoch_count) {
    count = 0;
    out.dropped_count[task] = 0;
    for (const auto& s : per_subject) {
      count += s.epoch_count.at(task);
      out.dropped_count[task] += s.dropped_count.at(task);
    }
  }
  return out;
}

std::vector<HemoSummaryRow> task_summary_stats(const EpochAverage& ea) {
  const auto onset = static_cast<std::size_t>(std::llround(ea.pre_s * ea.fs_hz));
  auto stats = [&](TaskLabel task, const std::string& channel, const char* modality,
                   const std::vector<double>& course) {
    HemoSummaryRow row;
    row.task = task;
    row.channel = channel;
    row.modality = modality;
    if (onset >= course.size()) return row;
    double sum = 0.0;
    std::size_t best = onset;
    for (std::size_t i = onset; i < course.size(); ++i) {
      sum += course[i];
      if (std::abs(course[i]) > std::abs(course[best])) best = i;
    }
    row.mean = sum / static_cast<double>(course.size() - onset);
    row.peak = course[best];
    row.time_to_peak_s = static_cast<double>(best - onset) / ea.fs_hz;
    return row;
  };
  std::vector<HemoSummaryRow> rows;
  for (const auto* group : {&ea.hbo2, &ea.hbr}) {
    const char* modality = group == &ea.hbo2 ? "HbO2" : "HbR";
    for (const auto& [task, channels] : *group) {
      std::vector<double> mean(ea.length, 0.0);
      for (const auto& ch : channels) {
        for (std::size_t i = 0; i < ea.length; ++i) mean[i] += ch[i] / channels.size();
      }
      rows.push_back(stats(task, "mean", modality, mean));
      for (std::size_t c = 0; c < channels.size(); ++c) {
        rows.push_back(stats(task, ea.channel_names[c], modality, channels[c]));
      }
    }
  }
  return rows;
}

void write_hemo_summary(const std::vector<HemoSummaryRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IoError", "cannot write " + path.string());
  out << "task,channel,modality,mean,peak,time_to_peak_s\n";
  for (const auto& r : rows) {
    out << to_string(r.task) << ',' << r.channel << ',' << r.modality << ','
        << csv::format(r.mean) << ',' << csv::format(r.peak) << ','
        << csv::format(r.time_to_peak_s) << '\n';
  }
}

}  // namespace cwl

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace cwl {

// Class indices double as network output indices for the multiclass stage.
enum class TaskLabel : int { Task1 = 0, Task2 = 1, Task3 = 2, Task4 = 3, NoTask = 4 };

// Binary stage output indices.
enum class BinaryLabel : int { NoTask = 0, CWL = 1 };

inline constexpr std::size_t kNumTaskLabels = 5;
inline constexpr std::size_t kNumBinaryLabels = 2;

inline constexpr std::array<TaskLabel, kNumTaskLabels> kAllTaskLabels = {
    TaskLabel::Task1, TaskLabel::Task2, TaskLabel::Task3, TaskLabel::Task4,
    TaskLabel::NoTask};

std::string_view to_string(TaskLabel label);
std::string_view to_string(BinaryLabel label);
TaskLabel parse_task_label(std::string_view text);
BinaryLabel parse_binary_label(std::string_view text);

inline BinaryLabel binary_of(TaskLabel label) {
  return label == TaskLabel::NoTask ? BinaryLabel::NoTask : BinaryLabel::CWL;
}

inline std::size_t index_of(TaskLabel label) { return static_cast<std::size_t>(label); }
inline std::size_t index_of(BinaryLabel label) { return static_cast<std::size_t>(label); }

}  // namespace cwl

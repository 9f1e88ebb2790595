#include "cwl/labels.hpp"

#include "cwl/error.hpp"

namespace cwl {

std::string_view to_string(TaskLabel label) {
  switch (label) {
    case TaskLabel::Task1: return "Task1";
    case TaskLabel::Task2: return "Task2";
    case TaskLabel::Task3: return "Task3";
    case TaskLabel::Task4: return "Task4";
    case TaskLabel::NoTask: return "NoTask";
  }
  return "?";
}

std::string_view to_string(BinaryLabel label) {
  return label == BinaryLabel::CWL ? "CWL" : "NoTask";
}

TaskLabel parse_task_label(std::string_view text) {
  for (TaskLabel l : kAllTaskLabels) {
    if (to_string(l) == text) return l;
  }
  throw Error("InvalidLabel", "unknown task label '" + std::string(text) + "'");
}

BinaryLabel parse_binary_label(std::string_view text) {
  if (text == "CWL") return BinaryLabel::CWL;
  if (text == "NoTask") return BinaryLabel::NoTask;
  throw Error("InvalidLabel", "unknown binary label '" + std::string(text) + "'");
}

}  // namespace cwl

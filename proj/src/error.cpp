#include "nmlsdr/error.hpp"

namespace nmlsdr {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput:
      return "invalid-input";
    case ErrorKind::kDegenerateGraph:
      return "degenerate-graph";
    case ErrorKind::kConvergence:
      return "convergence-failure";
    case ErrorKind::kNumeric:
      return "numeric";
    case ErrorKind::kUndefinedMetric:
      return "undefined-metric";
    case ErrorKind::kParse:
      return "parse";
    case ErrorKind::kIo:
      return "io";
    case ErrorKind::kConfig:
      return "config";
  }
  return "unknown";
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kInvalidInput:
      return 2;
    case ErrorKind::kParse:
    case ErrorKind::kIo:
      return 3;
    case ErrorKind::kDegenerateGraph:
    case ErrorKind::kConvergence:
    case ErrorKind::kNumeric:
    case ErrorKind::kUndefinedMetric:
      return 4;
  }
  return 1;
}

}  // namespace nmlsdr

#include "fdrkit/error.hpp"

namespace fdrkit {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::contract: return "contract";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::rank: return "rank";
    case ErrorKind::singularity: return "singularity";
    case ErrorKind::slicing: return "slicing";
    case ErrorKind::io: return "io";
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message, std::optional<double> value)
    : kind_(kind),
      detail_(message),
      message_(std::string(to_string(kind)) + " error: " + message),
      value_(value) {}

Error Error::with_stage(std::string stage) const {
  Error tagged(*this);
  tagged.stage_ = std::move(stage);
  tagged.message_ = std::string(to_string(kind_)) + " error in " + tagged.stage_ + ": " + detail_;
  return tagged;
}

bool Error::is_numerical() const noexcept {
  return kind_ == ErrorKind::rank || kind_ == ErrorKind::singularity ||
         kind_ == ErrorKind::slicing;
}

}  // namespace fdrkit

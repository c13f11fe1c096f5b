#include "gad/log.hpp"

#include <iostream>
#include <mutex>

namespace gad {
namespace {

std::mutex sink_mutex;
WarningSink current_sink;

}  // namespace

void warn(const std::string& message) {
  std::lock_guard<std::mutex> lock(sink_mutex);
  if (current_sink) {
    current_sink(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

WarningSink set_warning_sink(WarningSink sink) {
  std::lock_guard<std::mutex> lock(sink_mutex);
  auto previous = std::move(current_sink);
  current_sink = std::move(sink);
  return previous;
}

ScopedWarningCapture::ScopedWarningCapture() {
  previous_ = set_warning_sink([this](const std::string& m) { messages_.push_back(m); });
}

ScopedWarningCapture::~ScopedWarningCapture() { set_warning_sink(std::move(previous_)); }

}  // namespace gad

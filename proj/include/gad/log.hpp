#pragma once

#include <functional>
#include <string>
#include <vector>

namespace gad {

// Warnings go to stderr by default. Tests install a sink to observe them.
using WarningSink = std::function<void(const std::string&)>;

void warn(const std::string& message);

// Returns the previous sink. Passing an empty function restores stderr.
WarningSink set_warning_sink(WarningSink sink);

// Installs a sink for the lifetime of the guard.
class ScopedWarningCapture {
 public:
  ScopedWarningCapture();
  ~ScopedWarningCapture();
  ScopedWarningCapture(const ScopedWarningCapture&) = delete;
  ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }
  bool empty() const { return messages_.empty(); }

 private:
  std::vector<std::string> messages_;
  WarningSink previous_;
};

}  // namespace gad

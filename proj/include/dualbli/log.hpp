#pragma once

#include <functional>
#include <string>
#include <vector>

namespace dualbli {

using WarningSink = std::function<void(const std::string&)>;

// Warnings go to stderr unless a sink is installed.
void warn(const std::string& message);
void info(const std::string& message);

// Returns the previous sink. An empty sink restores the default.
WarningSink set_warning_sink(WarningSink sink);
void set_verbose(bool verbose);

// Collects warnings for the lifetime of the object.
class ScopedWarningCapture {
 public:
  ScopedWarningCapture();
  ~ScopedWarningCapture();
  ScopedWarningCapture(const ScopedWarningCapture&) = delete;
  ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }
  bool contains(const std::string& needle) const;

 private:
  std::vector<std::string> messages_;
  WarningSink previous_;
};

}  // namespace dualbli

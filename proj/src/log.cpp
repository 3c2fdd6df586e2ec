#include "dualbli/log.hpp"

#include <iostream>

namespace dualbli {

namespace {
WarningSink g_sink;
bool g_verbose = false;
}  // namespace

void warn(const std::string& message) {
  if (g_sink) {
    g_sink(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

void info(const std::string& message) {
  if (g_verbose) std::cerr << message << '\n';
}

WarningSink set_warning_sink(WarningSink sink) {
  WarningSink previous = std::move(g_sink);
  g_sink = std::move(sink);
  return previous;
}

void set_verbose(bool verbose) { g_verbose = verbose; }

ScopedWarningCapture::ScopedWarningCapture() {
  previous_ = set_warning_sink([this](const std::string& m) { messages_.push_back(m); });
}

ScopedWarningCapture::~ScopedWarningCapture() { set_warning_sink(std::move(previous_)); }

bool ScopedWarningCapture::contains(const std::string& needle) const {
  for (const auto& m : messages_) {
    if (m.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace dualbli

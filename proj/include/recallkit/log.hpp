#pragma once

#include <functional>
#include <string>

namespace recallkit::log {

enum class Level { info, warning };

using Sink = std::function<void(Level, const std::string&)>;

/// Replaces the process-wide sink and returns the previous one.
/// The default sink writes to stderr.
Sink set_sink(Sink sink);

void info(const std::string& message);
void warn(const std::string& message);

/// Restores the previous sink when destroyed.
class ScopedSink {
 public:
  explicit ScopedSink(Sink sink) : previous_(set_sink(std::move(sink))) {}
  ~ScopedSink() { set_sink(std::move(previous_)); }
  ScopedSink(const ScopedSink&) = delete;
  ScopedSink& operator=(const ScopedSink&) = delete;

 private:
  Sink previous_;
};

}  // namespace recallkit::log

#pragma once

#include <functional>
#include <string_view>

namespace lrl::log {

using Sink = std::function<void(std::string_view level, std::string_view message)>;

// Replaces the process-wide sink (stderr by default). Returns the previous one.
Sink set_sink(Sink sink);

void warn(std::string_view message);
void info(std::string_view message);

}  // namespace lrl::log

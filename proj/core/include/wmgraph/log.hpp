#pragma once

#include <functional>
#include <string>

namespace wmgraph {

using WarningHandler = std::function<void(const std::string&)>;

// Replaces the sink for numerical warnings (default: stderr). Returns the old one.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

}  // namespace wmgraph

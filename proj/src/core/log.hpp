#pragma once

#include <memory>
#include <string>

#include <spdlog/spdlog.h>

namespace michell {

// Library-wide logger ("michell"), writes to stderr.
std::shared_ptr<spdlog::logger> logger();

// Accepts trace, debug, info, warn, error, off. Returns false on unknown names.
bool set_log_level(const std::string& level);

} // namespace michell

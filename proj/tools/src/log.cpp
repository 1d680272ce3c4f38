#include "log.hpp"

#include <cstdlib>
#include <ostream>

#include "segtopics/error.hpp"

namespace segtopics::cli {

Log::Log(std::ostream& sink) : sink_(sink) {
    const char* env = std::getenv("SEGTOPICS_LOG");
    if (env == nullptr || *env == '\0') {
        return;
    }
    const std::string value = env;
    if (value == "error") {
        level_ = LogLevel::error;
    } else if (value == "info") {
        level_ = LogLevel::info;
    } else if (value == "debug") {
        level_ = LogLevel::debug;
    } else {
        throw ValidationError("SEGTOPICS_LOG must be error, info or debug, got '" + value + "'");
    }
}

void Log::write(LogLevel at, const std::string& message) const {
    if (static_cast<int>(at) > static_cast<int>(level_)) {
        return;
    }
    static constexpr const char* kNames[] = {"error", "info", "debug"};
    sink_ << "[" << kNames[static_cast<int>(at)] << "] " << message << '\n';
}

} // namespace segtopics::cli

#pragma once

#include <iosfwd>
#include <string>

namespace segtopics::cli {

enum class LogLevel { error = 0, info = 1, debug = 2 };

// Line logger on the error stream. The level comes from SEGTOPICS_LOG
// (error, info or debug; info when unset).
class Log {
public:
    explicit Log(std::ostream& sink);

    LogLevel level() const { return level_; }
    void error(const std::string& message) const { write(LogLevel::error, message); }
    void info(const std::string& message) const { write(LogLevel::info, message); }
    void debug(const std::string& message) const { write(LogLevel::debug, message); }

private:
    void write(LogLevel at, const std::string& message) const;

    std::ostream& sink_;
    LogLevel level_ = LogLevel::info;
};

} // namespace segtopics::cli

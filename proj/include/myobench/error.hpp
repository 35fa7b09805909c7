#pragma once

#include <stdexcept>
#include <string>

namespace myobench {

/// Base of every error raised by the library. `category()` is a short
/// machine-parsable tag the CLI prints ahead of the message.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& message)
        : std::runtime_error(message), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

struct DataError : Error {
    explicit DataError(const std::string& msg) : Error("data error", msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error("invalid config", msg) {}
};

struct FilterError : Error {
    explicit FilterError(const std::string& msg) : Error("filter error", msg) {}
};

struct FeatureError : Error {
    explicit FeatureError(const std::string& msg) : Error("feature error", msg) {}
};

struct ModelError : Error {
    explicit ModelError(const std::string& msg) : Error("model error", msg) {}
};

struct TaskUnavailable : Error {
    explicit TaskUnavailable(const std::string& msg) : Error("task unavailable", msg) {}
};

}  // namespace myobench

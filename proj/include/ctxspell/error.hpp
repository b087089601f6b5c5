#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ctxspell {

// Bad input data: malformed corpus lines, model files, UTF-8.
class parse_error : public std::runtime_error {
public:
    parse_error(std::string message, std::size_t line = 0, std::size_t column = 0)
        : std::runtime_error(format(message, line, column)),
          line_(line),
          column_(column) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    static std::string format(const std::string& message, std::size_t line,
                              std::size_t column) {
        std::string out = message;
        if (line > 0) {
            out += " (line " + std::to_string(line);
            if (column > 0) out += ", column " + std::to_string(column);
            out += ")";
        }
        return out;
    }

    std::size_t line_;
    std::size_t column_;
};

// Invalid configuration or parameter values.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& message)
        : std::runtime_error(message) {}
};

// Filesystem trouble: missing files, failed writes.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& message)
        : std::runtime_error(message) {}
};

// Model misuse detected at scoring time, e.g. a token position whose
// candidate tag set is empty.
class tagging_error : public std::runtime_error {
public:
    tagging_error(std::string message, std::size_t position)
        : std::runtime_error(message + " (position " + std::to_string(position) + ")"),
          position_(position) {}

    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

}  // namespace ctxspell

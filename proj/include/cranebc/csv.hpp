#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <system_error>

#include "cranebc/errors.hpp"

namespace cranebc {

/// Shortest decimal representation that round-trips the double exactly.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Minimal CSV emitter with deterministic, round-trip numeric formatting.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::string& header) : out_(path) {
        if (!out_) throw ConfigError("cannot open output file: " + path);
        out_ << header << '\n';
    }

    template <typename... Ts>
    void row(Ts... vals) {
        bool first = true;
        (append(first, vals), ...);
        out_ << '\n';
    }

    void close() { out_.close(); }

  private:
    void append(bool& first, double v) {
        if (!first) out_ << ',';
        first = false;
        out_ << format_double(v);
    }
    void append(bool& first, const std::string& v) {
        if (!first) out_ << ',';
        first = false;
        out_ << v;
    }
    void append(bool& first, const char* v) {
        if (!first) out_ << ',';
        first = false;
        out_ << v;
    }
    std::ofstream out_;
};

}  // namespace cranebc

#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace cqsim {

// 17 significant digits: enough to round-trip any double exactly.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Line-buffered CSV writer with "\n" endings and deterministic formatting.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::string& header) : out_(path, std::ios::binary) {
        if (!out_)
            throw std::runtime_error("cannot open '" + path + "' for writing");
        out_ << header << "\n";
    }

    template <typename... Ts>
    void row(const Ts&... vals) {
        bool first = true;
        ((out_ << (first ? "" : ","), first = false, put(vals)), ...);
        out_ << "\n";
    }

    void close() { out_.close(); }

  private:
    void put(double v) { out_ << fmt17(v); }
    void put(int v) { out_ << v; }
    void put(std::int64_t v) { out_ << v; }
    void put(std::uint64_t v) { out_ << v; }
    void put(bool v) { out_ << (v ? 1 : 0); }
    void put(const char* v) { out_ << v; }
    void put(const std::string& v) { out_ << v; }

    std::ofstream out_;
};

}  // namespace cqsim

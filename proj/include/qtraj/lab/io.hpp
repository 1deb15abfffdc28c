#ifndef QTRAJ_LAB_IO_HPP
#define QTRAJ_LAB_IO_HPP

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>
#include <unistd.h>

#include "json.hpp"
#include "qtraj/errors.hpp"

namespace qtraj::lab {

namespace fs = std::filesystem;

inline std::string sha256_hex(const std::string& data)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (!EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr))
        raise(ErrorKind::Unavailable, "SHA-256 digest failed");
    std::ostringstream os;
    os << std::hex << std::setfill('0');
    for (unsigned int i = 0; i < len; ++i)
        os << std::setw(2) << static_cast<int>(md[i]);
    return os.str();
}

inline std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        raise(ErrorKind::NotFound, "cannot open " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline std::string file_digest(const fs::path& p) { return sha256_hex(read_file(p)); }

/// Writes via a temporary file in the same directory and renames it over
/// the target.
inline void atomic_write(const fs::path& target, const std::string& content)
{
    fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            raise(ErrorKind::Unavailable, "cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out)
            raise(ErrorKind::Unavailable, "write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

/// Pretty-printed JSON; nlohmann::json objects keep their keys sorted.
inline std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

/// Shortest round-trip text for a double ("nan"/"inf" spelled out).
inline std::string fmt(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// CSV text with a single '#'-prefixed schema line.
class CsvTable
{
public:
    explicit CsvTable(std::vector<std::string> columns)
        : columns_(std::move(columns))
    {
    }

    template <class... Cells>
    void row(const Cells&... cells)
    {
        if (sizeof...(cells) != columns_.size())
            raise(ErrorKind::InvalidArgument, "row width does not match the schema");
        std::vector<std::string> r;
        (r.push_back(cell(cells)), ...);
        rows_.push_back(std::move(r));
    }

    std::string str() const
    {
        std::ostringstream os;
        os << "# ";
        for (std::size_t k = 0; k < columns_.size(); ++k)
            os << (k ? "," : "") << columns_[k];
        os << "\n";
        for (const auto& r : rows_) {
            for (std::size_t k = 0; k < r.size(); ++k)
                os << (k ? "," : "") << r[k];
            os << "\n";
        }
        return os.str();
    }

    const std::vector<std::string>& columns() const { return columns_; }
    std::size_t size() const { return rows_.size(); }

private:
    static std::string cell(double x) { return fmt(x); }
    static std::string cell(int x) { return std::to_string(x); }
    static std::string cell(long x) { return std::to_string(x); }
    static std::string cell(unsigned long x) { return std::to_string(x); }
    static std::string cell(bool x) { return x ? "1" : "0"; }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }

    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

/// Column names from the schema line of a CSV file.
inline std::vector<std::string> csv_columns(const fs::path& p)
{
    std::ifstream in(p);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
        raise(ErrorKind::InvalidArgument, p.string() + " has no schema line");
    std::vector<std::string> out;
    std::stringstream ss(line.substr(2));
    std::string col;
    while (std::getline(ss, col, ','))
        out.push_back(col);
    return out;
}

} // namespace qtraj::lab

#endif // QTRAJ_LAB_IO_HPP

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace roadstereo {

/// Flat `key=value` text: one pair per line, `#` starts a comment, blank
/// lines ignored. A key may repeat; all values are kept in order.
class KeyValueFile {
public:
    static KeyValueFile parse(std::istream& in);
    static KeyValueFile load(const std::filesystem::path& path);

    void set(const std::string& key, std::string value);
    void add(const std::string& key, std::string value);

    bool has(const std::string& key) const;
    std::optional<std::string> get(const std::string& key) const;
    std::vector<std::string> get_all(const std::string& key) const;
    std::vector<std::string> keys() const;

    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    double require_double(const std::string& key) const;

    void write(std::ostream& out) const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

double parse_double(const std::string& text, const std::string& what);
int parse_int(const std::string& text, const std::string& what);
/// Splits "a,b,c" into trimmed fields.
std::vector<std::string> split_csv_fields(const std::string& line);

}  // namespace roadstereo

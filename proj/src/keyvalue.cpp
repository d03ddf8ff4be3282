#include "roadstereo/keyvalue.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "roadstereo/errors.hpp"

namespace roadstereo {
namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::istream& in)
{
    KeyValueFile kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("line " + std::to_string(line_no) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw FormatError("line " + std::to_string(line_no) + ": empty key");
        kv.add(key, trim(line.substr(eq + 1)));
    }
    return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path.string() + "' for reading");
    try {
        return parse(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void KeyValueFile::set(const std::string& key, std::string value)
{
    std::erase_if(entries_, [&](const auto& e) { return e.first == key; });
    entries_.emplace_back(key, std::move(value));
}

void KeyValueFile::add(const std::string& key, std::string value) { entries_.emplace_back(key, std::move(value)); }

bool KeyValueFile::has(const std::string& key) const
{
    return std::ranges::any_of(entries_, [&](const auto& e) { return e.first == key; });
}

std::optional<std::string> KeyValueFile::get(const std::string& key) const
{
    // last occurrence wins
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
        if (it->first == key)
            return it->second;
    return std::nullopt;
}

std::vector<std::string> KeyValueFile::get_all(const std::string& key) const
{
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_)
        if (k == key)
            out.push_back(v);
    return out;
}

std::vector<std::string> KeyValueFile::keys() const
{
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_)
        if (std::ranges::find(out, k) == out.end())
            out.push_back(k);
    return out;
}

double KeyValueFile::get_double(const std::string& key, double fallback) const
{
    const auto v = get(key);
    return v ? parse_double(*v, key) : fallback;
}

int KeyValueFile::get_int(const std::string& key, int fallback) const
{
    const auto v = get(key);
    return v ? parse_int(*v, key) : fallback;
}

double KeyValueFile::require_double(const std::string& key) const
{
    const auto v = get(key);
    if (!v)
        throw FormatError("missing key '" + key + "'");
    return parse_double(*v, key);
}

void KeyValueFile::write(std::ostream& out) const
{
    for (const auto& [k, v] : entries_)
        out << k << '=' << v << '\n';
}

double parse_double(const std::string& text, const std::string& what)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (trim(text.substr(used)).empty())
            return v;
    } catch (const std::logic_error&) {
    }
    throw FormatError("'" + what + "': cannot parse '" + text + "' as a number");
}

int parse_int(const std::string& text, const std::string& what)
{
    try {
        std::size_t used = 0;
        const int v = std::stoi(text, &used);
        if (trim(text.substr(used)).empty())
            return v;
    } catch (const std::logic_error&) {
    }
    throw FormatError("'" + what + "': cannot parse '" + text + "' as an integer");
}

std::vector<std::string> split_csv_fields(const std::string& line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return out;
}

}  // namespace roadstereo

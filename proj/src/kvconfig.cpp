#include "agvcost/kvconfig.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace agvcost {

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string to_hex16(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

KvConfig KvConfig::parse(const std::string& text) {
    KvConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string key, tok, value;
        if (!(ls >> key))
            continue;
        while (ls >> tok) {
            if (!value.empty())
                value += ' ';
            value += tok;
        }
        if (value.empty())
            throw ParseError("key '" + key + "' has no value", line_no);
        cfg.entries_[key] = value;
    }
    return cfg;
}

KvConfig KvConfig::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double KvConfig::get_double(const std::string& key, double fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end())
        return fallback;
    try {
        std::size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (pos != it->second.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "': '" + it->second + "' is not a number");
    }
}

std::uint64_t KvConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end())
        return fallback;
    try {
        std::size_t pos = 0;
        unsigned long long v = std::stoull(it->second, &pos);
        if (pos != it->second.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "': '" + it->second +
                         "' is not an unsigned integer");
    }
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end())
        return fallback;
    const std::string& v = it->second;
    if (v == "1" || v == "true" || v == "yes")
        return true;
    if (v == "0" || v == "false" || v == "no")
        return false;
    throw UsageError("config key '" + key + "': '" + v + "' is not a boolean");
}

std::string KvConfig::canonical_text() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
        out += k;
        out += ' ';
        out += v;
        out += '\n';
    }
    return out;
}

}  // namespace agvcost

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "agvcost/errors.hpp"

namespace agvcost {

std::uint64_t fnv1a64(std::string_view data);
std::string to_hex16(std::uint64_t v);

// Line-oriented `key value` document, nested via dotted keys
// (e.g. `battery.t_empty 3600`). `#` starts a comment; the value is
// everything after the key, inner whitespace collapsed. Later duplicates of
// a key win. Unknown keys are ignored by consumers.
class KvConfig {
public:
    KvConfig() = default;
    static KvConfig parse(const std::string& text);
    static KvConfig from_file(const std::string& path);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    void set(const std::string& key, const std::string& value) { entries_[key] = value; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

    // Entries re-serialized sorted by key, one `key value` per line: the
    // canonical form the config digest is computed over.
    std::string canonical_text() const;
    std::uint64_t digest() const { return fnv1a64(canonical_text()); }

private:
    std::map<std::string, std::string> entries_;
};

}  // namespace agvcost

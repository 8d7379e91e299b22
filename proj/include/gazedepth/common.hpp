#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace gazedepth {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Collector for non-fatal diagnostics. Pass nullptr to discard.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string msg) {
    if (sink) sink->push_back(std::move(msg));
}

// ---------------------------------------------------------------------------
// Seeding

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Derive a stage seed from a top-level seed and a stage label.
/// Stable across runs; distinct labels give unrelated streams.
inline std::uint64_t seed_for(std::uint64_t seed, std::string_view label) {
    return splitmix64(seed ^ fnv1a64(label));
}

// ---------------------------------------------------------------------------
// Number formatting: shortest round-trip decimal, locale-independent.

inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error("malformed number: '" + std::string(s) + "'");
    return v;
}

inline long parse_long(std::string_view s) {
    long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error("malformed integer: '" + std::string(s) + "'");
    return v;
}

// ---------------------------------------------------------------------------
// Small text helpers

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// key=value files (meta, configs, provenance sidecars)

using KeyValueMap = std::map<std::string, std::string>;

inline void write_kv_file(const std::filesystem::path& path, const KeyValueMap& kv) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
}

inline KeyValueMap read_kv_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    KeyValueMap kv;
    std::string line;
    while (std::getline(in, line)) {
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        auto eq = sv.find('=');
        if (eq == std::string_view::npos)
            throw std::runtime_error(path.string() + ": expected key=value, got '" + std::string(sv) + "'");
        kv[std::string(trim(sv.substr(0, eq)))] = std::string(trim(sv.substr(eq + 1)));
    }
    return kv;
}

inline const std::string& kv_require(const KeyValueMap& kv, const std::string& key,
                                     const std::string& context) {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error(context + ": missing key '" + key + "'");
    return it->second;
}

// ---------------------------------------------------------------------------
// Parallelism. Worker count capped by GAZEDEPTH_THREADS; results must be
// written to index-addressed slots so the outcome is thread-count independent.

inline unsigned max_threads() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("GAZEDEPTH_THREADS")) {
        long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned long>(cap) < hw) hw = static_cast<unsigned>(cap);
    }
    return hw;
}

inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    unsigned workers = std::min<std::size_t>(max_threads(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::atomic<std::size_t> next{0};
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace gazedepth

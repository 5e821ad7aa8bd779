/*
 * util - deterministic RNG, flat key=value config files, seed derivation
 * and small text helpers shared across the library.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace platoonlab {

/// Deterministic 64-bit PRNG (splitmix64). All randomized components of the
/// library draw from this generator so that suites, learned models and
/// trained networks are reproducible bit-for-bit from a seed. Bounded
/// sampling uses rejection, never modulo, so the distribution is exactly
/// uniform and independent of the standard library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t bounded(std::uint64_t bound);

    /// Uniform integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    /// Uniform double in [0, 1).
    double uniform_real();

    /// Uniform double in [lo, hi).
    double uniform_real(double lo, double hi);

private:
    std::uint64_t state_;
};

/// FNV-1a hash of a string, used for seed derivation.
std::uint64_t fnv1a64(const std::string& s);

/// Derives the seed of a named pipeline stage from the master seed.
/// Schedule: splitmix64 applied to master ^ fnv1a64(stage). Stage names are
/// stable strings such as "learn", "gen/random/500" or "train/3".
std::uint64_t derive_seed(std::uint64_t master, const std::string& stage);

/// Flat key=value configuration file. Lines starting with '#' and blank
/// lines are ignored; values keep everything after the first '='.
class KvFile {
public:
    KvFile() = default;
    static KvFile load(const std::filesystem::path& path);
    static KvFile parse(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    /// Serialization in key-sorted order.
    std::string dump() const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// Splits on a delimiter; trims ASCII whitespace around items; drops empty
/// items.
std::vector<std::string> split_list(const std::string& s, char delim = ',');

/// Shortest decimal representation that round-trips a double exactly.
std::string format_double(double v);

/// Strict double/integer parsing (throws std::invalid_argument on trailing
/// garbage).
double parse_double(const std::string& s);
std::int64_t parse_int(const std::string& s);

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Results must be
/// written to index-addressed storage by the caller; the call returns after
/// all iterations finished. workers <= 1 runs inline.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

} // namespace platoonlab

#pragma once

#include <charconv>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sparsegen {

// Bad user input: file paths, config values, malformed records.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A backing service (embedding provider, decode server, teacher) failed.
struct BackendError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Retryable flavor of BackendError (connection reset, 5xx).
struct TransientBackendError : BackendError {
    using BackendError::BackendError;
};

// Completion text that does not follow the expected grammar. Keeps the raw
// text so it can be quarantined instead of silently dropped.
struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::string raw)
        : std::runtime_error(msg), raw_text(std::move(raw)) {}
    std::string raw_text;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

uint64_t fnv1a64(const void* data, size_t len);
inline uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }
std::string hex64(uint64_t v);

// Deterministic RNG: mt19937_64 engine (portable by the standard) with
// hand-rolled distributions so streams do not depend on the C++ library.
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t u64() { return eng_(); }

    // Unbiased integer in [0, n).
    uint64_t below(uint64_t n);

    // Uniform in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller (no cached spare; one value per call).
    double gaussian();

  private:
    std::mt19937_64 eng_;
};

std::string base64_encode(const void* data, size_t len);
std::vector<uint8_t> base64_decode(std::string_view s);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

// Runs fn(i) for i in [0, count) on up to max_in_flight threads. The first
// exception thrown by any fn is rethrown on the calling thread after join.
void parallel_for_index(size_t count, int max_in_flight,
                        const std::function<void(size_t)>& fn);

std::vector<std::string> split_whitespace(std::string_view text);
std::string trim(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

}  // namespace sparsegen

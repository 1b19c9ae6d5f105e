#pragma once

#include <atomic>
#include <chrono>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace social {

using Seconds = std::chrono::duration<double>;
using Timestamp = std::chrono::time_point<std::chrono::system_clock, Seconds>;

inline double to_epoch_seconds(Timestamp t) { return t.time_since_epoch().count(); }
inline Timestamp from_epoch_seconds(double s) { return Timestamp{Seconds{s}}; }

// Error taxonomy shared by all modules. The service maps these onto
// {code, message} bodies.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

// Transient failure; callers may retry.
class RetryableError : public Error {
public:
    using Error::Error;
};

class ProviderUnavailable : public Error {
public:
    using Error::Error;
};

class ProtocolError : public Error {
public:
    using Error::Error;
};

class AmbiguityError : public Error {
public:
    using Error::Error;
};

class Clock {
public:
    virtual ~Clock() = default;
    virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
public:
    Timestamp now() const override {
        return std::chrono::time_point_cast<Seconds>(std::chrono::system_clock::now());
    }
};

// Test and replay clock. Time only moves when told to.
class ManualClock final : public Clock {
public:
    explicit ManualClock(double start_epoch_seconds = 1'700'000'000.0) : t_(start_epoch_seconds) {}

    Timestamp now() const override { return from_epoch_seconds(t_.load()); }
    void set(Timestamp t) { t_.store(to_epoch_seconds(t)); }
    void advance(Seconds dt) { t_.store(t_.load() + dt.count()); }

private:
    std::atomic<double> t_;
};

// Text helpers used across modules.
std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
bool starts_with_icase(std::string_view s, std::string_view prefix);
bool contains_icase(std::string_view haystack, std::string_view needle);

// Largest prefix of `s` no longer than `max_bytes` that ends on a UTF-8
// code point boundary.
std::string_view utf8_prefix(std::string_view s, std::size_t max_bytes);

// Byte offset of every code point start, plus a final entry equal to
// s.size(). Throws ValidationError on malformed UTF-8.
std::vector<std::size_t> utf8_offsets(std::string_view s);
bool is_valid_utf8(std::string_view s);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
// Fixed-point with `digits` decimals, locale independent.
std::string format_fixed(double v, int digits);

}  // namespace social

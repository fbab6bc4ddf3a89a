#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace miir {

inline constexpr const char* kVersion = "0.1.0";

/// Error categories surfaced as CLI exit codes.
enum class ErrorKind {
    parse,      ///< malformed input file
    integrity,  ///< referential / invariant violation in loaded data
    config,     ///< invalid configuration value
    input,      ///< bad argument to an operation
    provider,   ///< embedding provider failure
    gateway,    ///< model gateway transport failure
    protocol,   ///< model gateway returned an out-of-contract response
    domain,     ///< operation precondition violated
    io,         ///< filesystem failure
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& msg): std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

struct ParseError: Error {
    explicit ParseError(const std::string& m): Error(ErrorKind::parse, m) {}
};
struct IntegrityError: Error {
    explicit IntegrityError(const std::string& m): Error(ErrorKind::integrity, m) {}
};
struct ConfigError: Error {
    explicit ConfigError(const std::string& m): Error(ErrorKind::config, m) {}
};
struct InputError: Error {
    explicit InputError(const std::string& m): Error(ErrorKind::input, m) {}
};
struct ProviderError: Error {
    explicit ProviderError(const std::string& m): Error(ErrorKind::provider, m) {}
};
struct GatewayError: Error {
    GatewayError(const std::string& m, int attempts = 0): Error(ErrorKind::gateway, m), attempts_(attempts) {}
    int attempts() const { return attempts_; }

  private:
    int attempts_;
};
struct ProtocolError: Error {
    explicit ProtocolError(const std::string& m): Error(ErrorKind::protocol, m) {}
};
struct DomainError: Error {
    explicit DomainError(const std::string& m): Error(ErrorKind::domain, m) {}
};
struct IoError: Error {
    explicit IoError(const std::string& m): Error(ErrorKind::io, m) {}
};

// 64-bit FNV-1a. Used wherever a stable, platform-independent hash is needed
// (feature hashing, seeded sampling, config fingerprints).
inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline constexpr std::uint64_t fnv1a(std::string_view s, std::uint64_t h = kFnvOffset) {
    for (unsigned char c: s) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

inline constexpr std::uint64_t fnv1a_u64(std::uint64_t v, std::uint64_t h = kFnvOffset) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffU;
        h *= kFnvPrime;
    }
    return h;
}

}  // namespace miir

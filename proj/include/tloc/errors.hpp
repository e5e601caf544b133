#pragma once

#include <stdexcept>
#include <string>

namespace tloc {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Precondition violations on API arguments (empty inputs etc).
struct InvalidArgument : Error {
    using Error::Error;
};

// --- time codec ---
struct InvalidGrid : Error {
    using Error::Error;
};
struct NonFiniteTimestamp : Error {
    using Error::Error;
};
struct IndexOutOfRange : Error {
    using Error::Error;
};

// --- embedding grids / pooling ---
struct InvalidEmbeddingGrid : Error {
    using Error::Error;
};
struct InvalidCount : Error {
    using Error::Error;
};
struct IndivisibleGrid : Error {
    using Error::Error;
};

// --- file I/O ---
struct IoError : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct SchemaError : Error {
    using Error::Error;
};
struct BadMagic : Error {
    using Error::Error;
};
struct TruncatedFile : Error {
    using Error::Error;
};

// --- task formatting / mixing ---
struct EmptyRecord : Error {
    using Error::Error;
};
struct EmptyField : Error {
    using Error::Error;
};
struct EmptyPool : Error {
    using Error::Error;
};

// --- evaluation ---
struct DuplicatePrediction : Error {
    using Error::Error;
};

// --- chat-completion client ---
struct AuthError : Error {
    using Error::Error;
};
struct RateLimited : Error {
    using Error::Error;
};
struct Timeout : Error {
    using Error::Error;
};
struct MalformedReply : Error {
    using Error::Error;
};
struct UnparseableVerdict : Error {
    using Error::Error;
};

// --- RTL sample generation ---
struct WholeReplyUnparseable : Error {
    using Error::Error;
};

} // namespace tloc

#pragma once

#include <stdexcept>
#include <string>

namespace sievelab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoRootError : Error {
    using Error::Error;
};
struct InfiniteMeanError : Error {
    using Error::Error;
};
struct CapacityExceededError : Error {
    using Error::Error;
};
struct InsufficientEnvironmentError : Error {
    using Error::Error;
};
struct GridTooFineError : Error {
    using Error::Error;
};
struct GridTooCoarseError : Error {
    using Error::Error;
};
struct NotCoveredError : Error {
    using Error::Error;
};
struct NotPsdError : Error {
    using Error::Error;
};
struct TooFewSamplesError : Error {
    using Error::Error;
};
struct DegenerateBinsError : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};

}  // namespace sievelab

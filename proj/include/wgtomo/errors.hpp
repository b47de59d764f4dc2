#pragma once

#include <stdexcept>
#include <string>

namespace wgtomo {

/// Invalid user-supplied parameters (bad config, violated type invariant).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Requested pulse area cannot be reached under the modulation amplitude cap.
class AmplitudeCapExceeded : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Base for numeric guards tripped during integration.
class NumericGuard : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StepTooLarge : public NumericGuard {
public:
    using NumericGuard::NumericGuard;
};

/// Sylvester's formula needs pairwise distinct eigenvalues.
class DegenerateSpectrum : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace wgtomo

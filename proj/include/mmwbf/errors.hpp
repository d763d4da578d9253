// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>

namespace mmwbf {

// Argument outside the mathematical domain of an operation (angle outside the
// sector, zero vector, mismatched dimensions).
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// Inconsistent experiment / codebook / schedule configuration.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Hard alignment had no admissible observation.
class AlignmentFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Numerical events which are tolerated but must not go unnoticed (probability
// clamping, covering distance clamping, ...). Every event is counted; the sink
// defaults to std::clog and may be replaced (tests silence it).
class Diagnostics {
  public:
    using Sink = std::function<void(const std::string&)>;

    static Diagnostics& instance()
    {
        static Diagnostics d;
        return d;
    }

    void warn(const std::string& msg)
    {
        ++count_;
        if (sink_)
            sink_(msg);
    }

    void set_sink(Sink sink) { sink_ = std::move(sink); }
    std::size_t count() const { return count_.load(); }
    void reset() { count_ = 0; }

  private:
    Diagnostics()
        : sink_([](const std::string& m) { std::clog << "mmwbf warning: " << m << '\n'; })
    {
    }

    std::atomic<std::size_t> count_{0};
    Sink sink_;
};

inline void warn(const std::string& msg) { Diagnostics::instance().warn(msg); }

} // namespace mmwbf

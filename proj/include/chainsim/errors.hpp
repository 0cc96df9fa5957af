// Copyright 2026 The chainsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace chainsim {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file. Messages name the offending 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& what, long line = -1)
        : Error(line >= 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

// A trace file with no data rows.
class EmptyTraceError : public Error {
public:
    explicit EmptyTraceError(const std::string& what) : Error(what) {}
};

// Invalid experiment/topology/machine configuration.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// Argument outside its mathematical domain.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

// Call graph construction found a cycle. Message names one cycle.
class CycleError : public Error {
public:
    explicit CycleError(const std::string& what) : Error(what) {}
};

// Model fitting rejected its inputs (insufficient history, empty pool, ...).
class TrainingError : public Error {
public:
    explicit TrainingError(const std::string& what) : Error(what) {}
};

}  // namespace chainsim

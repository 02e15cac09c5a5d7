// Copyright 2026 planetnerf contributors
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

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace planetnerf {

// Error taxonomy. Library code throws; the CLI maps ValidationError-like
// failures to exit 2 and TrainingError (divergence) to exit 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Ill-formed metadata or config file; carries file and field context.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, const std::string& field, const std::string& what)
      : Error("parse error in " + file + " (field '" + field + "'): " + what),
        file_(file),
        field_(field) {}
  const std::string& file() const { return file_; }
  const std::string& field() const { return field_; }

 private:
  std::string file_;
  std::string field_;
};

class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class SplitError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  using Error::Error;
};

class LocalizationError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

constexpr double kPi = 3.14159265358979323846;
constexpr double deg2rad(double d) { return d * kPi / 180.0; }
constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

// FNV-1a, used to derive independent RNG streams from (seed, name) pairs so
// tensors shared between model variants get identical initial values.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::mt19937_64 seeded_rng(std::uint64_t seed, const std::string& stream) {
  return std::mt19937_64(seed ^ fnv1a(stream));
}

// Mix integers into a stream seed (per-ray / per-batch determinism).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t h = seed;
  h ^= a + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  h ^= b + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

// Calendar instant in UTC. Seconds may be fractional.
struct DateTimeUtc {
  int year = 2000;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
  int hour = 0;
  int minute = 0;
  double second = 0.0;
};

bool is_leap_year(int year);
int days_in_month(int year, int month);
// Day of year in [1, 365/366].
int day_of_year(const DateTimeUtc& t);
// Julian day number (fractional), valid over the supported 1950-2100 window.
double julian_day(const DateTimeUtc& t);

// Parses ISO-8601 "YYYY-MM-DDTHH:MM[:SS[.fff]](Z|+HH:MM|-HH:MM)" and converts
// to UTC. Throws ValidationError on malformed input.
DateTimeUtc parse_iso8601_utc(const std::string& text);
std::string format_iso8601_utc(const DateTimeUtc& t);

}  // namespace planetnerf

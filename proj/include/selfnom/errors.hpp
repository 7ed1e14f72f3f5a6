// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace selfnom {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Gram matrix of a tentative user set is too ill-conditioned for ZF.
class RankDeficient : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

// Backward called with a cache produced before the last parameter update.
class StaleCache : public Error {
 public:
  using Error::Error;
};

class InvalidSplit : public Error {
 public:
  using Error::Error;
};

class MissingWeight : public Error {
 public:
  using Error::Error;
};

class ConfigMismatch : public Error {
 public:
  using Error::Error;
};

class CheckpointMismatch : public Error {
 public:
  using Error::Error;
};

class MissingCheckpoint : public Error {
 public:
  using Error::Error;
};

// Malformed or truncated binary file.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace selfnom

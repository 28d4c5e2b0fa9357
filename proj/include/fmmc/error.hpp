#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fmmc {

enum class ErrorKind {
  InvalidArgument,
  InfeasibleWeights,
  NotReversible,
  NotReducible,
  WrongRegime,
  InfeasibleFixedWeight,
  TooLarge,
  ReducibleChain,
};

const char* to_string(ErrorKind kind);

/// Base exception for every failure raised by the toolkit. The kind lets the
/// CLI map failures to exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::InvalidArgument, what) {}
};

/// A vertex budget sum_k q(i,k) <= pi_i is exceeded by `deficit`.
class InfeasibleWeights : public Error {
 public:
  InfeasibleWeights(std::size_t vertex, double deficit);

  std::size_t vertex() const noexcept { return vertex_; }
  double deficit() const noexcept { return deficit_; }

 private:
  std::size_t vertex_;
  double deficit_;
};

class NotReversible : public Error {
 public:
  explicit NotReversible(const std::string& what)
      : Error(ErrorKind::NotReversible, what) {}
};

/// Center-edge ratio condition q(0,2i-1)/pi(2i-1) == q(0,2i)/pi(2i) fails.
class NotReducible : public Error {
 public:
  explicit NotReducible(std::size_t blade);

  std::size_t blade() const noexcept { return blade_; }

 private:
  std::size_t blade_;
};

class WrongRegime : public Error {
 public:
  explicit WrongRegime(const std::string& what)
      : Error(ErrorKind::WrongRegime, what) {}
};

class InfeasibleFixedWeight : public Error {
 public:
  InfeasibleFixedWeight(std::size_t blade, double weight, double limit);

  std::size_t blade() const noexcept { return blade_; }

 private:
  std::size_t blade_;
};

class TooLarge : public Error {
 public:
  explicit TooLarge(const std::string& what)
      : Error(ErrorKind::TooLarge, what) {}
};

class ReducibleChain : public Error {
 public:
  explicit ReducibleChain(const std::string& what)
      : Error(ErrorKind::ReducibleChain, what) {}
};

}  // namespace fmmc

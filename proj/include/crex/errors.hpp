#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace crex {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input has inconsistent shapes or invalid entries.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// No complementary solution exists (Lemke ended with the artificial
/// variable still positive, or on a secondary ray).
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, double z0, bool ray = true)
      : Error(what), z0_(z0), ray_(ray) {}
  double z0() const { return z0_; }
  bool ray_termination() const { return ray_; }

 private:
  double z0_;
  bool ray_;
};

/// An enumeration would exceed a configured cap.
class CapacityError : public Error {
 public:
  CapacityError(const std::string& what, std::size_t requested,
                std::size_t cap)
      : Error(what), requested_(requested), cap_(cap) {}
  std::size_t requested() const { return requested_; }
  std::size_t cap() const { return cap_; }

 private:
  std::size_t requested_;
  std::size_t cap_;
};

struct PivotStep {
  int entering;
  int leaving;
  int row;
  double pivot;
};

/// Pivot element below tolerance or pivot budget exhausted.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, std::vector<PivotStep> history)
      : Error(what), history_(std::move(history)) {}
  const std::vector<PivotStep>& history() const { return history_; }

 private:
  std::vector<PivotStep> history_;
};

/// The active-set KKT system is singular (LICQ or strict complementarity
/// fails at the query point).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string section, int line)
      : Error(what), section_(std::move(section)), line_(line) {}
  const std::string& section() const { return section_; }
  int line() const { return line_; }

 private:
  std::string section_;
  int line_;
};

/// A power-system description violates a modelling rule.
class ModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace crex

#pragma once

#include <stdexcept>
#include <string>

namespace gridcomp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Consumption of a base station exceeds its cap; margin = consumption - cap.
class CapViolation : public Error {
 public:
  CapViolation(int bs, double margin)
      : Error("consumption cap exceeded at BS " + std::to_string(bs) + " by " +
              std::to_string(margin)),
        bs_(bs),
        margin_(margin) {}
  int bs() const { return bs_; }
  double margin() const { return margin_; }

 private:
  int bs_;
  double margin_;
};

// A battery left [C_min, C_max]. Raised instead of clamping.
class BatteryBoundViolation : public Error {
 public:
  BatteryBoundViolation(int bs, double level)
      : Error("battery level " + std::to_string(level) + " out of bounds at BS " +
              std::to_string(bs)),
        bs_(bs),
        level_(level) {}
  int bs() const { return bs_; }
  double level() const { return level_; }

 private:
  int bs_;
  double level_;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace gridcomp

#pragma once

#include <stdexcept>
#include <string>

namespace mtsf {

// Root of every error raised by the library. The CLI maps ConfigError to exit
// code 2 and everything else to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class InvalidLayout : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConstructionError : public Error {
 public:
  using Error::Error;
};

// Robot indices are zero-based in the accessors and one-based in messages.
class SingularActuation : public Error {
 public:
  SingularActuation(int robot, double det)
      : Error("singular actuation at robot " + std::to_string(robot + 1) +
              " (|det B| = " + std::to_string(det) + ")"),
        robot_(robot) {}
  int robot() const { return robot_; }

 private:
  int robot_;
};

class BarrierViolation : public Error {
 public:
  BarrierViolation(int i, int j, double distance)
      : BarrierViolation(i, j, distance, "") {}
  BarrierViolation(int i, int j, double distance, double time)
      : BarrierViolation(i, j, distance, " at t = " + std::to_string(time) + " s") {}
  int first() const { return i_; }
  int second() const { return j_; }
  double distance() const { return distance_; }

 private:
  BarrierViolation(int i, int j, double distance, const std::string& when)
      : Error("barrier violation between robots " + std::to_string(i + 1) +
              " and " + std::to_string(j + 1) + " (separation " +
              std::to_string(distance) + " m)" + when),
        i_(i), j_(j), distance_(distance) {}

  int i_, j_;
  double distance_;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

class CertificateError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace mtsf

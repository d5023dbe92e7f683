#pragma once

#include <stdexcept>
#include <string>

namespace cle {

// Error classes map onto CLI exit statuses (see cle::experiment::exit_code).
enum class ErrorClass {
  domain,       // argument outside the mathematical domain of an operation
  config,       // malformed or unknown configuration
  numerical,    // fit failures, empty estimates, trace blow-ups
  quality,      // statistical quality gates (e.g. too many undecidable trials)
  undecidable,  // undecidable-fraction gate of the event estimator
  geometry,     // degenerate ray casts and similar
  render,       // nothing to draw
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), class_(cls) {}
  ErrorClass error_class() const noexcept { return class_; }

 private:
  ErrorClass class_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorClass::domain, w) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorClass::config, w) {}
};
struct NumericalError : Error {
  explicit NumericalError(const std::string& w) : Error(ErrorClass::numerical, w) {}
};
struct QualityError : Error {
  explicit QualityError(const std::string& w) : Error(ErrorClass::quality, w) {}
};
struct UndecidableError : Error {
  explicit UndecidableError(const std::string& w) : Error(ErrorClass::undecidable, w) {}
};
struct GeometryError : Error {
  explicit GeometryError(const std::string& w) : Error(ErrorClass::geometry, w) {}
};
struct RenderError : Error {
  explicit RenderError(const std::string& w) : Error(ErrorClass::render, w) {}
};

/// Raised by theta_drift when evaluated on {0, 2π}; the caller must reflect instead.
struct BoundaryError : DomainError {
  explicit BoundaryError(const std::string& w) : DomainError(w) {}
};

/// Reverse-flow trace evaluation produced a non-finite point or left the closed disk.
struct TraceError : NumericalError {
  TraceError(const std::string& w, double time, double modulus)
      : NumericalError(w), time_(time), modulus_(modulus) {}
  double time() const noexcept { return time_; }
  double modulus() const noexcept { return modulus_; }

 private:
  double time_;
  double modulus_;
};

}  // namespace cle

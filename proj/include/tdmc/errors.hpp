#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace tdmc {

// Invalid user-supplied configuration. The CLI maps this to exit status 1.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Everything below is a failure of a run that was correctly configured.
// The CLI maps these to exit status 2.
class RuntimeError : public std::runtime_error {
 public:
  explicit RuntimeError(const std::string& what) : std::runtime_error(what), text_(what) {}

  const char* what() const noexcept override { return text_.c_str(); }

  // Tags the error with the replica it came from; callers rethrow with `throw;`
  // so the dynamic type survives.
  void set_replica(std::size_t replica) {
    replica_ = replica;
    text_ = "replica " + std::to_string(replica) + ": " + std::runtime_error::what();
  }
  std::optional<std::size_t> replica() const noexcept { return replica_; }

 private:
  std::string text_;
  std::optional<std::size_t> replica_;
};

class PopulationExplosionError : public RuntimeError {
 public:
  PopulationExplosionError(std::size_t step, std::size_t population, std::size_t cap)
      : RuntimeError("population explosion at step " + std::to_string(step) + ": " +
                     std::to_string(population) + " particles exceeds cap " +
                     std::to_string(cap)),
        step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class WeightOverflowError : public RuntimeError {
 public:
  WeightOverflowError(std::size_t step, std::size_t particle, const std::string& what)
      : RuntimeError("non-finite weight at step " + std::to_string(step) + ", particle " +
                     std::to_string(particle) + ": " + what),
        step_(step),
        particle_(particle) {}
  explicit WeightOverflowError(const std::string& what) : RuntimeError(what) {}
  std::size_t step() const noexcept { return step_; }
  std::size_t particle() const noexcept { return particle_; }

 private:
  std::size_t step_ = 0;
  std::size_t particle_ = 0;
};

class DegenerateWeightsError : public RuntimeError {
 public:
  explicit DegenerateWeightsError(const std::string& what) : RuntimeError(what) {}
};

class SingularityError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

class DataError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

class ModeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Raised when a branching invariant that holds by construction is violated.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace tdmc

#ifndef EVLAB_ERROR_HPP
#define EVLAB_ERROR_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace evlab {

/// Invalid argument supplied to a library operation.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The circulant embedding of a correlation model has a significantly
/// negative eigenvalue at the requested size.
class EmbeddingFailure : public std::runtime_error {
 public:
  EmbeddingFailure(const std::string& model, std::size_t n, double min_eigenvalue, double max_eigenvalue)
      : std::runtime_error("circulant embedding failed for " + model + " at n=" + std::to_string(n) +
                           ": eigenvalue " + std::to_string(min_eigenvalue) + " (max " +
                           std::to_string(max_eigenvalue) + ")"),
        model_(model),
        n_(n),
        min_eigenvalue_(min_eigenvalue) {}

  const std::string& model() const noexcept { return model_; }
  std::size_t n() const noexcept { return n_; }
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  std::string model_;
  std::size_t n_;
  double min_eigenvalue_;
};

/// A failure while producing one Monte Carlo replicate.
class ReplicateError : public std::runtime_error {
 public:
  ReplicateError(std::uint64_t replicate, const std::string& what)
      : std::runtime_error("replicate " + std::to_string(replicate) + ": " + what), replicate_(replicate) {}

  std::uint64_t replicate() const noexcept { return replicate_; }

 private:
  std::uint64_t replicate_;
};

/// Configuration problem; `field()` names the first offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace evlab

#endif  // EVLAB_ERROR_HPP

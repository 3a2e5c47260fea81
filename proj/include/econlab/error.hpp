#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace econlab {

/// Input failed validation. `fields()` names every offending field or symbol.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& message, std::vector<std::string> fields = {})
      : std::runtime_error(message), fields_(std::move(fields)) {}

  const std::vector<std::string>& fields() const noexcept { return fields_; }

 private:
  std::vector<std::string> fields_;
};

/// Lookup of an id (job, session, config hash, memory ref) that does not exist.
class NotFoundError : public std::runtime_error {
 public:
  NotFoundError(const std::string& what_kind, const std::string& id)
      : std::runtime_error(what_kind + " not found: " + id), id_(id) {}

  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

/// Operation is not legal in the object's current state (e.g. export of a running job).
class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace econlab

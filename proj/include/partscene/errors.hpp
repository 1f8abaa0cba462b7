#pragma once

#include <stdexcept>
#include <string>

namespace partscene {

// Exit-code buckets used by the CLI: 1 = input/validation, 2 = pipeline, 3 = internal.
enum class ErrorKind {
  Validation,
  Pipeline,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

struct PreconditionError : Error {
  explicit PreconditionError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

struct DegenerateGeometryError : Error {
  explicit DegenerateGeometryError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

struct InvalidPolygonError : Error {
  explicit InvalidPolygonError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

struct DegenerateInputError : Error {
  explicit DegenerateInputError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

struct NoConvergenceError : Error {
  explicit NoConvergenceError(const std::string& what) : Error(ErrorKind::Pipeline, what) {}
};

struct FittingFailedError : Error {
  explicit FittingFailedError(const std::string& what) : Error(ErrorKind::Pipeline, what) {}
};

struct DisconnectedStructureError : Error {
  explicit DisconnectedStructureError(const std::string& what) : Error(ErrorKind::Pipeline, what) {}
};

struct NamingCollisionError : Error {
  explicit NamingCollisionError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

struct VoxelizationIntegrityError : Error {
  explicit VoxelizationIntegrityError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

}  // namespace partscene

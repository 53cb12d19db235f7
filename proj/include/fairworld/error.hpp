#pragma once

#include <stdexcept>
#include <string>

namespace fairworld {

// Broad failure class, used by the CLI to pick an exit status.
enum class ErrorClass { Config, Data, Numeric };

class Error : public std::runtime_error {
 public:
  Error(std::string kind, ErrorClass cls, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)), class_(cls) {}

  const std::string& kind() const noexcept { return kind_; }
  ErrorClass error_class() const noexcept { return class_; }

 private:
  std::string kind_;
  ErrorClass class_;
};

#define FAIRWORLD_ERROR(Name, Class)                                   \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& message)                          \
        : Error(#Name, ErrorClass::Class, message) {}                  \
  };

// Graph / model specification.
FAIRWORLD_ERROR(CycleError, Config)
FAIRWORLD_ERROR(UnknownParentError, Config)
FAIRWORLD_ERROR(SpecError, Config)
FAIRWORLD_ERROR(ConfigError, Config)

// Data problems.
FAIRWORLD_ERROR(ParseError, Data)
FAIRWORLD_ERROR(SchemaMismatch, Data)
FAIRWORLD_ERROR(TooFewRows, Data)
FAIRWORLD_ERROR(UnmappedCategory, Data)
FAIRWORLD_ERROR(DegenerateGroup, Data)
FAIRWORLD_ERROR(EmptyGroup, Data)
FAIRWORLD_ERROR(DegenerateTarget, Data)
FAIRWORLD_ERROR(SingleClass, Data)
FAIRWORLD_ERROR(TooFewPoints, Data)

// Numerical failures.
FAIRWORLD_ERROR(InvalidParamError, Numeric)
FAIRWORLD_ERROR(GridExhausted, Numeric)

#undef FAIRWORLD_ERROR

}  // namespace fairworld

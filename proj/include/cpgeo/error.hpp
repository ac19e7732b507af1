#pragma once

#include <stdexcept>
#include <string>

namespace cpgeo {

// Base of every typed failure raised by the toolkit. kind() is the stable
// error name printed by the CLI on the diagnostic stream.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define CPGEO_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  };

CPGEO_DEFINE_ERROR(FormatError)
CPGEO_DEFINE_ERROR(CorruptPayload)
CPGEO_DEFINE_ERROR(ValidationError)
CPGEO_DEFINE_ERROR(IoError)
CPGEO_DEFINE_ERROR(SchemaError)
CPGEO_DEFINE_ERROR(ParseError)
CPGEO_DEFINE_ERROR(IndexError)
CPGEO_DEFINE_ERROR(DegenerateVector)
CPGEO_DEFINE_ERROR(DomainError)
CPGEO_DEFINE_ERROR(DegenerateInput)
CPGEO_DEFINE_ERROR(TooFewItems)
CPGEO_DEFINE_ERROR(EmptyInput)
CPGEO_DEFINE_ERROR(DegenerateDesign)
CPGEO_DEFINE_ERROR(TooFewPoints)
CPGEO_DEFINE_ERROR(UnbalancedDesign)
CPGEO_DEFINE_ERROR(ConfigError)

#undef CPGEO_DEFINE_ERROR

}  // namespace cpgeo

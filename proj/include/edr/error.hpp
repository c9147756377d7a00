#pragma once

#include <stdexcept>
#include <string>

namespace edr {

/// Root of every error raised by the library. `exit_code()` maps the error
/// onto the CLI's exit-code convention (3 = input/parse, 4 = plug-in).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 3; }
};

#define EDR_DEFINE_ERROR(Name, Base)   \
  class Name : public Base {           \
   public:                             \
    using Base::Base;                  \
  };

EDR_DEFINE_ERROR(DimensionError, Error)
EDR_DEFINE_ERROR(NoContentError, Error)
EDR_DEFINE_ERROR(SizeError, Error)
EDR_DEFINE_ERROR(OverlapError, Error)
EDR_DEFINE_ERROR(GeometryError, Error)
EDR_DEFINE_ERROR(EmptyGlcmError, Error)
EDR_DEFINE_ERROR(ConfigError, Error)
EDR_DEFINE_ERROR(TooSmallError, Error)
EDR_DEFINE_ERROR(FrameError, Error)
EDR_DEFINE_ERROR(SchemaError, Error)
EDR_DEFINE_ERROR(ParseError, Error)
EDR_DEFINE_ERROR(IoError, Error)

class PluginError : public Error {
 public:
  PluginError(const std::string& what, std::string diagnostics = {})
      : Error(diagnostics.empty() ? what : what + ": " + diagnostics),
        diagnostics_(std::move(diagnostics)) {}
  int exit_code() const noexcept override { return 4; }
  const std::string& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::string diagnostics_;
};

// Malformed plug-in output. Still a plug-in failure as far as the CLI is concerned.
class ProtocolError : public PluginError {
 public:
  using PluginError::PluginError;
};

#undef EDR_DEFINE_ERROR

}  // namespace edr

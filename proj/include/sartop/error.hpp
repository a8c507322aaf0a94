#ifndef SARTOP_ERROR_HPP_
#define SARTOP_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace sartop {

// Error categories; mirrored one-to-one by the SARTOP_ERR_* codes of the C API.
enum class ErrorCode {
  kInvalidArgument = 1,
  kShapeMismatch = 2,
  kParse = 3,
  kIo = 4,
  kDomain = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace sartop

#endif  // SARTOP_ERROR_HPP_

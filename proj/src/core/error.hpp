// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef SMM_CORE_ERROR_HPP
#define SMM_CORE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace smm {

// Error categories; they map 1:1 onto the C API status codes and the CLI
// exit codes (usage=1, data=2, numeric=3).
enum class ErrorKind { Usage = 1, Data = 2, Numeric = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error usage_error(const std::string& msg) {
  return Error(ErrorKind::Usage, msg);
}
inline Error data_error(const std::string& msg) {
  return Error(ErrorKind::Data, msg);
}
inline Error numeric_error(const std::string& msg) {
  return Error(ErrorKind::Numeric, msg);
}

}  // namespace smm

#endif  // SMM_CORE_ERROR_HPP

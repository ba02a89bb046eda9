#ifndef WGM_ERROR_HPP
#define WGM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace wgm
{

// Failure categories. Each maps to one CLI exit code.
enum class ErrorKind
{
  Validation,  // malformed or inconsistent input (exit 4)
  Cutoff,      // omega too close to a cutoff frequency (exit 2)
  Solver,      // factorization or eigensolver failure (exit 3)
  Io           // file system failures (exit 5)
};

class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, std::string module, const std::string &what)
    : std::runtime_error(what), kind_(kind), module_(std::move(module))
  {
  }

  ErrorKind kind() const { return kind_; }

  // Name of the module that raised the error ("mesh", "fem", ...).
  const std::string &module() const { return module_; }

private:
  ErrorKind kind_;
  std::string module_;
};

// Raised by the text parsers; carries the 1-based line number of the offending line.
class ParseError : public Error
{
public:
  ParseError(std::string module, std::size_t line, const std::string &what)
    : Error(ErrorKind::Validation, std::move(module),
            "line " + std::to_string(line) + ": " + what),
      line_(line)
  {
  }

  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

int exit_code(ErrorKind kind);
const char *kind_name(ErrorKind kind);

}  // namespace wgm

#endif  // WGM_ERROR_HPP

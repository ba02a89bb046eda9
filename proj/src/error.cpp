#include "wgm/error.hpp"

namespace wgm
{

int exit_code(ErrorKind kind)
{
  switch (kind)
  {
    case ErrorKind::Cutoff:
      return 2;
    case ErrorKind::Solver:
      return 3;
    case ErrorKind::Validation:
      return 4;
    case ErrorKind::Io:
      return 5;
  }
  return 1;
}

const char *kind_name(ErrorKind kind)
{
  switch (kind)
  {
    case ErrorKind::Cutoff:
      return "cutoff";
    case ErrorKind::Solver:
      return "solver";
    case ErrorKind::Validation:
      return "validation";
    case ErrorKind::Io:
      return "io";
  }
  return "unknown";
}

}  // namespace wgm

#pragma once

#include <stdexcept>
#include <string>

namespace simforge {

struct ParamMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DocumentNotFound : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct CompilerUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CompileTimeout : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InitializationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SelectionExhausted : std::runtime_error {
  SelectionExhausted() : std::runtime_error("no selectable candidate in the mutation pool") {}
};

struct GrowthCapReached : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace simforge

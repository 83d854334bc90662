#pragma once

#include <string>

#include "mspec/nn/arch.hpp"
#include "mspec/nn/params.hpp"

namespace mspec::nn {

// Self-describing binary snapshot: magic, version, free-form metadata
// string, the ArchSpec, then name -> (shape, little-endian f64 data) for
// every parameter. Round-trips bit-exactly.
struct Checkpoint {
  ArchSpec spec;
  ParamSet params;
  std::string metadata;  // e.g. "algorithm=maml_rnn seed=7"
};

void save_checkpoint(const std::string& path, const Checkpoint& c);

// Throws ParseError (with byte offset) on malformed or truncated input;
// never returns a partial result.
Checkpoint load_checkpoint(const std::string& path);

// Same, but refuses a checkpoint whose ArchSpec differs from `expected`.
Checkpoint load_checkpoint_expecting(const std::string& path,
                                     const ArchSpec& expected);

}  // namespace mspec::nn

#pragma once

namespace compois {

/// threads == 1 selects the serial reference path; > 1 the OpenMP path.
/// Both produce bit-identical results for the same inputs.
struct ExecPolicy {
  int threads = 1;
};

}  // namespace compois

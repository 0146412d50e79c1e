// Error types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace bootci {

struct InvalidDataset : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// X'X failed the relative pivot test; usually a degenerate resample.
struct SingularDesign : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Some leverage is numerically 1, so HC2..HC5 weights blow up.
struct LeverageOne : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptySample : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TooManyDegenerateResamples : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Population slope does not exist for the requested mean/covariate pair.
struct NonFiniteEstimand : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bootci

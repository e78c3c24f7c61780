#pragma once

#include <stdexcept>
#include <string>

namespace chemception {

// Base for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- molecule pipeline ---
struct SyntaxError : Error { using Error::Error; };
struct UnsupportedElement : Error { using Error::Error; };
struct MultiFragment : Error { using Error::Error; };
struct LayoutDegenerate : Error { using Error::Error; };
struct LayoutTooLarge : Error { using Error::Error; };
struct PixelCollision : Error { using Error::Error; };

// --- tensor engine / network ---
struct ShapeMismatch : Error { using Error::Error; };
struct NumericalFault : Error { using Error::Error; };
struct SpecInvalid : Error { using Error::Error; };
struct VersionMismatch : Error { using Error::Error; };

// --- data / training ---
struct MalformedCSV : Error { using Error::Error; };
struct UnknownTask : Error { using Error::Error; };
struct TooFewRecords : Error { using Error::Error; };
struct DegenerateClass : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };

// --- generic I/O ---
struct IoError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace chemception

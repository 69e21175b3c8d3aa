#pragma once

#include <stdexcept>
#include <string>

namespace orbitglue {

// Base class for every error this library raises on purpose. Anything else
// escaping the public API is a bug.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input: bad system description, bad point encoding, bad parameter
// ranges. Messages carry a JSON-ish path to the offending field when the
// input came from a document.
struct InvalidSpec : Error {
  using Error::Error;
};

// Orbit sequence and gap lengths disagree (a gap needs exactly rank-1 terms).
struct RankMismatch : InvalidSpec {
  using InvalidSpec::InvalidSpec;
};

// A point was paired with a system it does not belong to.
struct SystemMismatch : InvalidSpec {
  using InvalidSpec::InvalidSpec;
};

// Numeric arguments outside the defined domain (N < 2, M < 1, n <= 0, ...).
struct BadArgs : InvalidSpec {
  using InvalidSpec::InvalidSpec;
};

// An exact symbolic algorithm was asked to run on a non-SFT system.
struct NotAnSft : Error {
  using Error::Error;
};

// A sampling-based search needs a candidate pool and none was supplied.
struct PoolRequired : Error {
  using Error::Error;
};

// A pool-driven operation received a pool with no usable points.
struct EmptyPool : Error {
  using Error::Error;
};

// The dichotomy construction needs a finite gluing bound and the system has
// none at the requested scale. Expected outcome for non-gluing systems.
struct GluingFailed : Error {
  using Error::Error;
};

// The dichotomy pair failed its stay-away hypothesis and the construction
// could not be completed anyway.
struct StayAwayViolated : Error {
  using Error::Error;
};

// Covering time is only defined for minimal systems.
struct NotMinimal : Error {
  using Error::Error;
};

// Exhaustive pair enumeration needs a finite phase space.
struct NotFinite : Error {
  using Error::Error;
};

// The requested operation is not implemented for this system kind.
struct Unsupported : Error {
  using Error::Error;
};

}  // namespace orbitglue

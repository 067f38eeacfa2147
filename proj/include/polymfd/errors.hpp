// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace polymfd {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define POLYMFD_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                        \
  public:                                                            \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

// Geometry / mesh
POLYMFD_DEFINE_ERROR(DegenerateFace);
POLYMFD_DEFINE_ERROR(NonPlanarFace);
POLYMFD_DEFINE_ERROR(OpenSurface);
POLYMFD_DEFINE_ERROR(NegativeVolume);
POLYMFD_DEFINE_ERROR(InvalidParam);
POLYMFD_DEFINE_ERROR(ParseError);
POLYMFD_DEFINE_ERROR(SchemaVersionMismatch);

// Quadrature / local forms
POLYMFD_DEFINE_ERROR(WeightSolveFailure);
POLYMFD_DEFINE_ERROR(RankDeficientN);
POLYMFD_DEFINE_ERROR(RankDeficiency);
POLYMFD_DEFINE_ERROR(SingularKTilde);
POLYMFD_DEFINE_ERROR(NonPositive);

// Assembly / solvers
POLYMFD_DEFINE_ERROR(EmptyInterior);
POLYMFD_DEFINE_ERROR(SingularSystem);
POLYMFD_DEFINE_ERROR(NoConvergence);
POLYMFD_DEFINE_ERROR(SingularFactorization);

// Postprocessing
POLYMFD_DEFINE_ERROR(MissingExact);
POLYMFD_DEFINE_ERROR(BadSequence);

#undef POLYMFD_DEFINE_ERROR

}  // namespace polymfd

#pragma once

#include <stdexcept>
#include <string>

namespace psmpm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

#define PSMPM_DEFINE_ERROR(Name)                                          \
    class Name : public Error                                             \
    {                                                                     \
      public:                                                             \
        explicit Name(const std::string& what) : Error(#Name ": " + what) \
        {}                                                                \
    }

// mesh
PSMPM_DEFINE_ERROR(DegenerateTriangle);
PSMPM_DEFINE_ERROR(RefinementFailed);
PSMPM_DEFINE_ERROR(InvalidMesh);
PSMPM_DEFINE_ERROR(MeshDegenerate);

// basis
PSMPM_DEFINE_ERROR(CollinearPoints);
PSMPM_DEFINE_ERROR(SingularControlTriangle);
PSMPM_DEFINE_ERROR(InteriorVertexConstrained);
PSMPM_DEFINE_ERROR(UnsupportedBoundary);
PSMPM_DEFINE_ERROR(InconsistentConstraints);
PSMPM_DEFINE_ERROR(Outside);

// mpm core
PSMPM_DEFINE_ERROR(ParticleOutsideMesh);
PSMPM_DEFINE_ERROR(SolverDiverged);
PSMPM_DEFINE_ERROR(NonPositiveJacobian);
PSMPM_DEFINE_ERROR(ParticleLeftDomain);

// benchmarks / io
PSMPM_DEFINE_ERROR(MismatchedSeries);
PSMPM_DEFINE_ERROR(ValidationError);
PSMPM_DEFINE_ERROR(IOError);

#undef PSMPM_DEFINE_ERROR

/// Configuration syntax error; carries the 1-based line number.
class ParseError : public Error
{
  public:
    ParseError(int line, const std::string& what)
        : Error("ParseError: line " + std::to_string(line) + ": " + what), line_(line)
    {}

    int line() const noexcept { return line_; }

  private:
    int line_;
};

} // namespace psmpm

#ifndef WKBSQ_ERRORS_HPP
#define WKBSQ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wkbsq {

/// Base class of every error the library throws.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

#define WKBSQ_DEFINE_ERROR(Name)                                            \
    class Name : public Error {                                             \
    public:                                                                 \
        explicit Name(const std::string& what = "") : Error(#Name, what) {} \
    }

// cone_geometry
WKBSQ_DEFINE_ERROR(EmptySectoroid);

// novikov
WKBSQ_DEFINE_ERROR(ConeMismatch);
WKBSQ_DEFINE_ERROR(CutoffMismatch);
WKBSQ_DEFINE_ERROR(NonConvexCone);
WKBSQ_DEFINE_ERROR(NotAUnit);
WKBSQ_DEFINE_ERROR(ConeNotContained);

// transseries
WKBSQ_DEFINE_ERROR(NotExponentiable);
WKBSQ_DEFINE_ERROR(ZeroElement);

// connection
WKBSQ_DEFINE_ERROR(PoleAtBasePoint);
WKBSQ_DEFINE_ERROR(NotInvertible);
WKBSQ_DEFINE_ERROR(ClusteredEigenvalues);
WKBSQ_DEFINE_ERROR(TurningPointAtBase);
WKBSQ_DEFINE_ERROR(NotWeaklySemisimple);
WKBSQ_DEFINE_ERROR(NotReducedForm);
WKBSQ_DEFINE_ERROR(DegenerateJacobian);
WKBSQ_DEFINE_ERROR(NoFormalSeed);
WKBSQ_DEFINE_ERROR(NotIntegrable);

// stokes
WKBSQ_DEFINE_ERROR(TurningPointEvaluation);
WKBSQ_DEFINE_ERROR(DegenerateDiscriminant);
WKBSQ_DEFINE_ERROR(NonSimpleTurningPoint);
WKBSQ_DEFINE_ERROR(TracerStalled);
WKBSQ_DEFINE_ERROR(ArrangementDegeneracy);

// sheaf_quantization
WKBSQ_DEFINE_ERROR(NotGeneric);
WKBSQ_DEFINE_ERROR(MissingRule);
WKBSQ_DEFINE_ERROR(NotClosed);
WKBSQ_DEFINE_ERROR(GraphMismatch);

// cli
WKBSQ_DEFINE_ERROR(ParseError);
WKBSQ_DEFINE_ERROR(StageError);
WKBSQ_DEFINE_ERROR(IoError);

#undef WKBSQ_DEFINE_ERROR

} // namespace wkbsq

#endif

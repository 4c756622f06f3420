#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mtrace {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define MTRACE_ERROR(name)                 \
    class name : public Error {            \
    public:                                \
        using Error::Error;                \
    };

MTRACE_ERROR(ModulusMismatch)
MTRACE_ERROR(NonUnitDeterminant)
MTRACE_ERROR(BadFactorization)
MTRACE_ERROR(NotDivisor)
MTRACE_ERROR(ClosureCapExceeded)
MTRACE_ERROR(NotPrimePowerLevel)
MTRACE_ERROR(UnsupportedLevel)
MTRACE_ERROR(InvalidPairing)
MTRACE_ERROR(InvalidAutomorphism)
MTRACE_ERROR(DivisionByZeroPolynomial)
MTRACE_ERROR(PoleError)
MTRACE_ERROR(DegenerateComposition)
MTRACE_ERROR(ZeroInput)
MTRACE_ERROR(NonSquareDiscriminant)
MTRACE_ERROR(ReducibleCubic)
MTRACE_ERROR(BadPrime)
MTRACE_ERROR(SingularSpecialization)
MTRACE_ERROR(CharacteristicDividesN)
MTRACE_ERROR(TwoTorsionPoint)
MTRACE_ERROR(PrimeTooLarge)
MTRACE_ERROR(CatalogError)

#undef MTRACE_ERROR

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t pos)
        : Error(what + " at position " + std::to_string(pos)), pos_(pos) {}
    std::size_t position() const { return pos_; }

private:
    std::size_t pos_;
};

}  // namespace mtrace

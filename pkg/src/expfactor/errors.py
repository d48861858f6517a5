"""Exception hierarchy.

Every error carries a machine-readable ``category`` string and the exit code
the command line maps it to.
"""


class FactorError(Exception):
    category = "error"
    exit_code = 1

    def __init__(self, msg, certificate=None, **context):
        super().__init__(msg)
        self.certificate = certificate
        self.context = context


class ParseError(FactorError):
    category = "parse"
    exit_code = 2


class ValidationError(FactorError):
    category = "validation"
    exit_code = 2


class PreconditionError(FactorError):
    category = "precondition"
    exit_code = 3


class ContractError(PreconditionError):
    """An operation was called on an input outside its contract."""
    category = "contract"


class DomainError(PreconditionError):
    category = "domain"


class NotAUnitError(PreconditionError):
    category = "not-a-unit"


class ZeroFunctionError(NotAUnitError):
    category = "zero-function"


class UncertifiableError(PreconditionError):
    """Boundary modulus too small to trust a winding count."""
    category = "uncertifiable"


class NotInvertibleError(NotAUnitError):
    category = "not-invertible"


class NotNullHomotopicError(PreconditionError):
    category = "not-null-homotopic"


class DegenerateEigenvalueError(PreconditionError):
    category = "degenerate-eigenvalues"


class InternalConsistencyError(FactorError):
    category = "internal-consistency"
    exit_code = 3


class ReductionFailedError(FactorError):
    category = "reduction-failed"
    exit_code = 4


class ResidualError(FactorError):
    category = "residual"
    exit_code = 5

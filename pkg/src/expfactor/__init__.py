"""Factor elements of SL2 and GL2 over the disc algebra as two exponentials.

    >>> from expfactor import fixtures, factor_sl2
    >>> a = fixtures.shear_corpus(count=1)[0]
    >>> fac = factor_sl2(a)
    >>> fac.factor_count
    2
"""
from .errors import FactorError
from .factor import Factorization, factor_gl2, factor_sl2
from .holofun import DiscFunction
from .mat2 import MatFun
from .verify import Report, residual_report

__all__ = ["DiscFunction", "MatFun", "Factorization", "Report", "FactorError",
           "factor_sl2", "factor_gl2", "residual_report"]
__version__ = "0.1.0"

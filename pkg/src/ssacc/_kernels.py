"""Select the kernel backend at import.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
pure-Python ``_pykernels`` module is used.  Setting ``SSACC_BACKEND=python``
forces the fallback.
"""
import os

BACKEND = "python"
if os.environ.get("SSACC_BACKEND", "").lower() != "python":
    try:
        from ssacc import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        from ssacc import _pykernels as _impl
else:
    from ssacc import _pykernels as _impl

lgamma = _impl.lgamma
lower_gamma = _impl.lower_gamma
regularized_lower_gamma = _impl.regularized_lower_gamma
upper_gamma = _impl.upper_gamma
upper_gamma_cf = _impl.upper_gamma_cf
e1 = _impl.e1
e1_scaled = _impl.e1_scaled
laguerre_rule = _impl.laguerre_rule
ncx2_logpdf = _impl.ncx2_logpdf
ncx2_cdf = _impl.ncx2_cdf
bob_sum = _impl.bob_sum
willie_sum = _impl.willie_sum

__all__ = [
    "BACKEND",
    "lgamma",
    "lower_gamma",
    "regularized_lower_gamma",
    "upper_gamma",
    "upper_gamma_cf",
    "e1",
    "e1_scaled",
    "laguerre_rule",
    "ncx2_logpdf",
    "ncx2_cdf",
    "bob_sum",
    "willie_sum",
]

"""DFI 中间表示: lower, enumerate_sites, validate_ir"""

from dfi_ir.instructions import AllocKind, IRFunction, IRProgram
from dfi_ir.lowering import lower
from dfi_ir.sites import AllocSite, DefSite, SiteCatalog, UseSite, enumerate_sites
from dfi_ir.text import format_ir
from dfi_ir.validate import validate_ir

__all__ = [
    "AllocKind",
    "IRFunction",
    "IRProgram",
    "lower",
    "AllocSite",
    "DefSite",
    "SiteCatalog",
    "UseSite",
    "enumerate_sites",
    "format_ir",
    "validate_ir",
]

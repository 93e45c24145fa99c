"""Forward and inverse scattering of biharmonic (thin-plate flexural) waves."""

__version__ = "0.1.0"

from .torus import TorusGrid, TrigPoly, TorusBallKernel
from .sg import SGLevel, SGPoly, harmonic_extension, sg_energy, sg_energy_bilinear, kusuoka_weights
from .product import ProductSG, ProductFunction, ProductHeatKernel, product_carre
from .builders import ball_kernel, heat_kernel, levy_kernel, product_heat

__all__ = [
    "TorusGrid",
    "TrigPoly",
    "TorusBallKernel",
    "SGLevel",
    "SGPoly",
    "harmonic_extension",
    "sg_energy",
    "sg_energy_bilinear",
    "kusuoka_weights",
    "ProductSG",
    "ProductFunction",
    "ProductHeatKernel",
    "product_carre",
    "ball_kernel",
    "heat_kernel",
    "levy_kernel",
    "product_heat",
]

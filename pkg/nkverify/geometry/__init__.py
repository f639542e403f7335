# lagrangian and invariants import nkverify.dsl, which imports this package: use their module paths.
from nkverify.geometry.backend import EXACT, FLOAT, Backend, get_backend
from nkverify.geometry.quaternion import ImaginaryQuaternion, Quaternion, UnitQuaternion
from nkverify.geometry.structure import (
    apply_J,
    apply_P,
    covariant_derivative_along,
    curvature,
    from_lie,
    levi_civita,
    lie_bracket,
    lie_coords,
    metric_g,
    nabla_G,
    nabla_P,
    tensor_G,
)
from nkverify.geometry.types import ManifoldPoint, TangentVector

__all__ = [
    "Backend",
    "EXACT",
    "FLOAT",
    "ImaginaryQuaternion",
    "ManifoldPoint",
    "Quaternion",
    "TangentVector",
    "UnitQuaternion",
    "apply_J",
    "apply_P",
    "covariant_derivative_along",
    "curvature",
    "from_lie",
    "get_backend",
    "levi_civita",
    "lie_bracket",
    "lie_coords",
    "metric_g",
    "nabla_G",
    "nabla_P",
    "tensor_G",
]

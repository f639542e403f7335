"""The eight Lagrangian immersions f1..f8 of the classification.

u is realised as exp(x i + y j + z k) near the identity.
"""

from __future__ import annotations

import functools
import math

import numpy as np

from nkverify.dsl.parser import parse
from nkverify.dsl.types import ImmersionDescriptor
from nkverify.errors import UnknownImmersionError

_U = "let u = exp(x, y, z)"

CATALOG_SOURCES: dict[str, str] = {
    "f1": f"""immersion f1
vars x y z
{_U}
left = const(1, 0, 0, 0)
right = u
""",
    "f2": f"""immersion f2
vars x y z
{_U}
left = u
right = const(1, 0, 0, 0)
""",
    "f3": f"""immersion f3
vars x y z
{_U}
left = u
right = u
""",
    "f4": f"""immersion f4
vars x y z
{_U}
left = u
right = u * const(0, 1, 0, 0)
""",
    "f5": f"""immersion f5
vars x y z
{_U}
let i = const(0, 1, 0, 0)
left = u * i * inv(u)
right = inv(u)
""",
    "f6": f"""immersion f6
vars x y z
{_U}
let i = const(0, 1, 0, 0)
left = inv(u)
right = u * i * inv(u)
""",
    "f7": f"""immersion f7
vars x y z
{_U}
let i = const(0, 1, 0, 0)
let j = const(0, 0, 1, 0)
left = u * i * inv(u)
right = u * j * inv(u)
""",
    # (x, y, z) = (u, v, w): p(u, w) and q(u, v) are products of one-parameter subgroups
    "f8": """immersion f8
vars x y z
left = exp(sqrt3/2*z, 0, 0) * exp(0, sqrt3/2*x, 0)
right = exp(sqrt3/2*y, 0, 0) * exp(0, sqrt3/2*x - pi/4, 0)
""",
}


def catalog_names() -> list[str]:
    return list(CATALOG_SOURCES)


@functools.lru_cache(maxsize=None)
def catalog(name: str) -> ImmersionDescriptor:
    if name not in CATALOG_SOURCES:
        raise UnknownImmersionError(name, catalog_names())
    return parse(CATALOG_SOURCES[name])


def f8_reference(chart_point) -> tuple[np.ndarray, np.ndarray]:
    """The trigonometric components of f8 as (p(u, w), q(u, v))."""
    u, v, w = (math.sqrt(3) / 2 * float(c) for c in chart_point)
    p = np.array([math.cos(u) * math.cos(w), math.cos(u) * math.sin(w), math.sin(u) * math.cos(w), math.sin(u) * math.sin(w)])
    plus, minus = math.sin(u) + math.cos(u), math.sin(u) - math.cos(u)
    q = np.array([math.cos(v) * plus, math.sin(v) * plus, math.cos(v) * minus, math.sin(v) * minus]) / math.sqrt(2)
    return p, q

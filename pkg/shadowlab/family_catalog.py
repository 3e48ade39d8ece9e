"""
Family Catalog
Canonical symbol families with their expected shadowing verdicts, loaded
from symbol_families.json, plus random draws from each family.
"""

import cmath
import json
import math
import os
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import lft_core as lft
from .errors import ConfigError, InvalidParameter


def _decode(params: Dict[str, list]) -> Dict[str, complex]:
    return {name: complex(value[0], value[1]) for name, value in params.items()}


def param_label(params: Dict[str, complex]) -> str:
    """Stable text form, e.g. 'a=0.3+0.4i;c=0.2-0.1i'"""
    def fmt(z: complex) -> str:
        if z.imag == 0:
            return f"{z.real:g}"
        return f"{z.real:g}{z.imag:+g}i"
    return ';'.join(f"{name}={fmt(value)}" for name, value in sorted(params.items()))


class FamilyCatalog:
    """The seven canonical families and their parameter samples"""

    def __init__(self, catalog_path: str = None):
        if catalog_path is None:
            catalog_path = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'symbol_families.json')

        try:
            with open(catalog_path, 'r', encoding='utf-8') as f:
                self.catalog = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"❌ cannot load family catalog {catalog_path}: {e}")

        self.families = {family['tag']: family for family in self.catalog['families']}
        unknown = set(self.families) - set(lft.SYMBOL_CLASSES)
        if unknown:
            raise ConfigError(f"❌ unknown symbol classes in catalog: {sorted(unknown)}")

    @property
    def tags(self) -> List[str]:
        return [family['tag'] for family in self.catalog['families']]

    def get_family(self, tag: str) -> Dict:
        if tag not in self.families:
            raise InvalidParameter(f"unknown symbol class {tag!r}")
        return self.families[tag]

    def expected_verdict(self, tag: str) -> bool:
        return bool(self.get_family(tag)['expected_verdict'])

    def samples(self, tag: str) -> List[Dict[str, complex]]:
        return [_decode(sample) for sample in self.get_family(tag)['samples']]

    def build(self, tag: str, params: Dict[str, complex]) -> lft.MoebiusMap:
        return lft.family_shape(tag, params)

    def rows(self) -> List[Tuple[str, Dict[str, complex], lft.MoebiusMap]]:
        """(tag, params, phi) for every sample, in catalog order"""
        return [(tag, params, self.build(tag, params)) for tag in self.tags for params in self.samples(tag)]


def random_family_params(tag: str, rng: np.random.Generator) -> Dict[str, complex]:
    """Random parameters strictly inside the admissible region of a family"""
    if tag == lft.EA:
        return {'omega': cmath.exp(1j * rng.uniform(0.05, 2 * math.pi - 0.05))}
    if tag in (lft.HA, lft.HNA_I, lft.HNA_II):
        return {'r': complex(rng.uniform(0.05, 0.95))}
    if tag == lft.LOX:
        a = rng.uniform(0.05, 0.95) * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        radius = rng.uniform(0, 0.9) * (1 - abs(a)) / abs(1 - a)
        c = radius * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        return {'a': a, 'c': c}
    if tag == lft.PA:
        t = rng.uniform(0.1, 4.0) * rng.choice((-1.0, 1.0))
        return {'a': complex(0.0, t)}
    if tag == lft.PNA:
        return {'a': complex(rng.uniform(0.05, 3.0), rng.uniform(-2.5, 2.5))}
    raise InvalidParameter(f"unknown symbol class {tag!r}")


def random_family_map(tag: str, rng: np.random.Generator) -> Tuple[lft.MoebiusMap, Dict[str, complex]]:
    params = random_family_params(tag, rng)
    return lft.family_shape(tag, params), params


# Global instance
_catalog_instance: Optional[FamilyCatalog] = None


def get_family_catalog() -> FamilyCatalog:
    global _catalog_instance
    if _catalog_instance is None:
        _catalog_instance = FamilyCatalog()
    return _catalog_instance
